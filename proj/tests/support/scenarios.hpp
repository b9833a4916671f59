#pragma once

// End-to-end expectations for the fixtures in fixtures.hpp, shared by the
// pipeline tests and the acceptance binary.

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "fixtures.hpp"

namespace scenario {

/// EDL spans the tribute fixture must produce, traced by hand from the
/// fixture design: Support Sets order over the cue texts, scenes marked
/// tonal qualify, fill to the song length.
std::vector<std::pair<std::int64_t, std::int64_t>> expected_tribute_spans(const fixture::TributeFixture& fx,
                                                                           double support_threshold = 0.1);

struct Verdict {
  bool ok = true;
  std::string why;
};

/// Checks a talk report: every selected clip comes from the matching
/// documentary, no clip repeats, and the selection equals the greedy
/// lecture-order walk re-run from the report's candidate sets and pool.
Verdict check_talk_report(const std::string& report_json, const fixture::TalkFixture& fx);

}  // namespace scenario
