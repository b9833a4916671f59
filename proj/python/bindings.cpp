#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "montage/audio_features.hpp"
#include "montage/error.hpp"
#include "montage/pipeline.hpp"
#include "montage/scene_detect.hpp"
#include "montage/subtitle.hpp"
#include "montage/textrank.hpp"
#include "montage/topic_model.hpp"

namespace py = pybind11;
using namespace pybind11::literals;

namespace {

py::list ranked_pairs(const montage::RankedList& ranked) {
  py::list out;
  for (const auto& item : ranked.items) out.append(py::make_tuple(item.index, item.score));
  return out;
}

py::dict cue_dict(const montage::SubtitleCue& c) {
  return py::dict("index"_a = c.index, "start_ms"_a = c.span.start_ms, "end_ms"_a = c.span.end_ms,
                  "lines"_a = c.lines);
}

montage::SubtitleCue cue_from(const py::dict& d) {
  montage::SubtitleCue c;
  c.index = d.contains("index") ? d["index"].cast<int>() : 0;
  c.span = {d["start_ms"].cast<std::int64_t>(), d["end_ms"].cast<std::int64_t>()};
  c.lines = d["lines"].cast<std::vector<std::string>>();
  return c;
}

py::dict run_result(const montage::RunResult& r) {
  std::vector<std::string> written;
  for (const auto& p : r.written) written.push_back(p.string());
  py::dict timings;
  for (const auto& t : r.timings) timings[py::str(t.stage)] = t.ms;
  return py::dict("edl_json"_a = r.edl_json, "report_json"_a = r.report_json, "written"_a = written,
                  "timings"_a = timings);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Edit decision lists for film tributes and lecture-driven science talks";

  py::register_exception<montage::Error>(m, "MontageError", PyExc_ValueError);
  py::register_exception<montage::StageError>(m, "StageError", PyExc_RuntimeError);

  m.attr("EMOTION_VECTOR_SIZE") = montage::kEmotionVectorSize;
  m.attr("DEFAULT_EMOTION_THRESHOLD") = montage::kDefaultEmotionThreshold;
  m.attr("DEFAULT_SCENE_THRESHOLD") = montage::kDefaultSceneThreshold;

  m.def(
      "parse_srt",
      [](py::bytes data) {
        py::list out;
        for (const auto& c : montage::parse_srt(std::string(data))) out.append(cue_dict(c));
        return out;
      },
      "data"_a, "Cues of an SRT file as dicts with index, start_ms, end_ms and lines.");

  m.def(
      "to_srt",
      [](const py::list& cues) {
        std::vector<montage::SubtitleCue> parsed;
        for (const auto& c : cues) parsed.push_back(cue_from(c.cast<py::dict>()));
        return montage::to_srt(parsed);
      },
      "cues"_a);

  m.def(
      "sentences",
      [](py::bytes data) {
        py::list out;
        for (const auto& s : montage::assemble_sentences(montage::parse_srt(std::string(data)))) {
          out.append(py::dict("id"_a = s.id, "text"_a = s.text, "start_ms"_a = s.span.start_ms,
                              "end_ms"_a = s.span.end_ms, "source_cues"_a = s.source_cues));
        }
        return out;
      },
      "data"_a, "Sentences assembled from the cues of an SRT file.");

  m.def(
      "support_sets",
      [](const std::vector<std::string>& texts, double threshold) {
        return ranked_pairs(montage::support_set_rank(montage::tfidf_vectors(texts), {threshold, std::nullopt}));
      },
      "texts"_a, "threshold"_a = 0.1, "(index, support) pairs, most central first.");

  m.def(
      "grasshopper",
      [](const std::vector<std::vector<double>>& weights, double lambda, std::size_t k,
         std::vector<double> prior) {
        montage::SimilarityGraph graph(weights.size());
        for (std::size_t i = 0; i < weights.size(); ++i) {
          if (weights[i].size() != weights.size()) {
            throw montage::Error(montage::ErrorCode::InvalidArgument, "weights must be square");
          }
          for (std::size_t j = i + 1; j < weights.size(); ++j) graph.set_weight(i, j, weights[i][j]);
        }
        montage::GrasshopperConfig config;
        config.lambda = lambda;
        config.k = k;
        config.prior = std::move(prior);
        return ranked_pairs(montage::grasshopper_rank(graph, config));
      },
      "weights"_a, "lam"_a = 0.95, "k"_a = 10, "prior"_a = std::vector<double>{},
      "(index, score) pairs from a symmetric weight matrix; the upper triangle is read.");

  m.def("topic_tokens", &montage::topic_tokens, "text"_a);

  py::class_<montage::TopicModel>(m, "TopicModel")
      .def_property_readonly("topics", &montage::TopicModel::topics)
      .def_property_readonly("vocabulary", &montage::TopicModel::vocabulary)
      .def_property_readonly("alpha", &montage::TopicModel::alpha)
      .def_readonly("bound_trace", &montage::TopicModel::elbo_trace)
      .def("topic", [](const montage::TopicModel& t, std::size_t k) {
        if (k >= t.topics()) throw py::index_error("topic out of range");
        const auto row = t.topic_row(k);
        return std::vector<double>(row.begin(), row.end());
      })
      .def("infer", [](const montage::TopicModel& t, const std::vector<std::string>& tokens) {
        return montage::infer_mixture(t, tokens).theta;
      });

  m.def(
      "train_lda",
      [](const std::vector<std::vector<std::string>>& docs, std::size_t topics, std::uint64_t seed,
         std::size_t em_iters, std::size_t min_df) {
        montage::LdaConfig config;
        config.topics = topics;
        config.seed = seed;
        config.em_iters = em_iters;
        config.min_df = min_df;
        return montage::train_lda(docs, config);
      },
      "docs"_a, "topics"_a = 100, "seed"_a = 1, "em_iters"_a = 50, "min_df"_a = 2);

  m.def(
      "emotion_vector",
      [](std::vector<double> samples, double sample_rate) {
        const auto v = montage::emotion_vector(montage::PcmClip{std::move(samples), sample_rate});
        return std::vector<double>(v.values.begin(), v.values.end());
      },
      "samples"_a, "sample_rate"_a, "384 functionals of the clip's low-level descriptors.");
  m.def("feature_names", &montage::feature_names);

  m.def(
      "detect_scenes",
      [](const std::vector<std::tuple<std::int64_t, std::int64_t, double>>& stats, double threshold,
         std::size_t min_frames) {
        std::vector<montage::FrameStat> frames;
        for (const auto& [index, ts, diff] : stats) frames.push_back({index, ts, diff});
        py::list out;
        for (const auto& s : montage::detect_scenes(frames, {threshold, min_frames})) {
          out.append(py::make_tuple(s.span.start_ms, s.span.end_ms, s.first_frame, s.frame_count));
        }
        return out;
      },
      "stats"_a, "threshold"_a = montage::kDefaultSceneThreshold, "min_frames"_a = 10,
      "(start_ms, end_ms, first_frame, frame_count) per scene from (frame, timestamp_ms, diff) rows.");

  m.def(
      "run",
      [](const std::string& config_path, const std::string& overrides_json) {
        auto config = montage::load_config(config_path);
        if (!overrides_json.empty()) {
          montage::apply_config_json(config, overrides_json, std::filesystem::path(config_path).parent_path());
        }
        montage::validate(config);
        montage::RunResult result;
        {
          py::gil_scoped_release release;
          result = montage::run_pipeline(config);
        }
        return run_result(result);
      },
      "config_path"_a, "overrides_json"_a = "",
      "Runs the pipeline described by a JSON config; overrides use the same keys.");
}
