#include "kbc/service/config.h"

#include <filesystem>

#include "kbc/base/errors.h"
#include "kbc/base/strings.h"

namespace kbc::service {

namespace {

std::string Resolve(const std::string &base, const std::string &p) {
  if (p.empty()) return p;
  std::filesystem::path path(p);
  if (path.is_absolute()) return p;
  return (std::filesystem::path(base) / path).lexically_normal().string();
}

template <typename T>
T Get(const Json &j, const char *key, const T &fallback) {
  if (!j.contains(key) || j[key].is_null()) return fallback;
  try {
    return j[key].get<T>();
  } catch (const Json::exception &e) {
    throw ConfigError(std::string("config field '") + key + "': " + e.what());
  }
}

// Nested sections parse with their own FromJson; prefix errors with the
// section so the user knows where to look.
template <typename F>
auto Section(const char *name, F &&parse) {
  try {
    return parse();
  } catch (const Json::exception &e) {
    throw ConfigError(std::string("config section '") + name + "': " + e.what());
  } catch (const ConfigError &e) {
    throw ConfigError(std::string("config section '") + name + "': " + e.what());
  }
}

}  // namespace

PipelineConfig PipelineConfig::FromJson(const Json &j, const std::string &base_dir) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  PipelineConfig c;
  c.run_id = Get<std::string>(j, "run_id", "");
  if (c.run_id.empty() || c.run_id.find('/') != std::string::npos) {
    throw ConfigError("config field 'run_id' must be a non-empty name without '/'");
  }
  const Json paths = j.value("paths", Json::object());
  c.corpus_manifest = Resolve(base_dir, Get<std::string>(paths, "corpus_manifest", ""));
  c.rod = Resolve(base_dir, Get<std::string>(paths, "rod", ""));
  c.direct_annotations = Resolve(base_dir, Get<std::string>(paths, "direct_annotations", ""));
  c.er_data = Resolve(base_dir, Get<std::string>(paths, "er_data", ""));
  c.registry = Resolve(base_dir, Get<std::string>(paths, "registry", "registry"));
  c.runs = Resolve(base_dir, Get<std::string>(paths, "runs", "runs"));
  c.embeddings = Resolve(base_dir, Get<std::string>(paths, "embeddings", ""));

  if (!j.contains("repr_mode")) throw ConfigError("config field 'repr_mode' is required");
  c.repr_mode = Section("repr_mode", [&] {
    return repr::ParseReprMode(Get<std::string>(j, "repr_mode", ""));
  });
  c.k_top = Get<int>(j, "k_top", 3);
  if (c.k_top < 1) throw ConfigError("config field 'k_top' must be positive");

  const Json emb = j.value("embedding", Json::object());
  c.embedding_dim = Get<int>(emb, "dim", 300);
  c.oov_policy = Section("embedding", [&] {
    return repr::ParseOovPolicy(Get<std::string>(emb, "oov", "hashed"));
  });
  c.embedding_seed = Get<uint64_t>(emb, "seed", 0);
  if (c.embedding_dim < 1) throw ConfigError("config field 'embedding.dim' must be positive");

  const Json cls = j.value("cls_encoder", Json::object());
  c.cls_checkpoint = Resolve(base_dir, Get<std::string>(cls, "checkpoint", ""));
  if (cls.contains("config")) {
    c.cls_encoder =
        Section("cls_encoder", [&] { return nn::TransformerConfig::FromJson(cls["config"]); });
  }

  c.rod_passthrough_extra_columns = Get<bool>(j, "rod_passthrough_extra_columns", false);

  const Json split = j.value("split", Json::object());
  c.split.train = Get<double>(split, "train", 0.8);
  c.split.val = Get<double>(split, "val", 0.1);
  c.split.test = Get<double>(split, "test", 0.1);
  c.split_seed = Get<uint64_t>(split, "seed", 13);

  const Json thresholds = j.value("thresholds", Json::object());
  c.asc_threshold = Get<double>(thresholds, "ascertainment", 0.5);

  c.asc = Section("asc", [&] {
    return asc::AscTrainConfig::FromJson(j.value("asc", Json::object()));
  });
  c.asc.threshold = c.asc_threshold;
  Json er = j.value("er", Json::object());
  if (j.contains("window")) er["window"] = j["window"];
  if (thresholds.contains("relation")) er["relation_threshold"] = thresholds["relation"];
  c.er = Section("er", [&] { return er::ERTrainConfig::FromJson(er); });

  c.ablation_seed = Get<uint64_t>(j.value("ablation", Json::object()), "seed", 5);
  return c;
}

PipelineConfig PipelineConfig::Load(const std::string &path) {
  Json j;
  try {
    j = Json::parse(ReadFile(path));
  } catch (const Json::parse_error &e) {
    throw ConfigError("config " + path + " is not valid JSON: " + e.what());
  }
  std::string base = std::filesystem::path(path).parent_path().string();
  return FromJson(j, base.empty() ? "." : base);
}

Json PipelineConfig::ToJson() const {
  Json asc_json = asc.ToJson();
  Json er_json = er.ToJson();
  er_json.erase("window");
  er_json.erase("relation_threshold");
  asc_json.erase("threshold");
  return {{"run_id", run_id},
          {"paths",
           {{"corpus_manifest", corpus_manifest},
            {"rod", rod},
            {"direct_annotations", direct_annotations},
            {"er_data", er_data},
            {"registry", registry},
            {"runs", runs},
            {"embeddings", embeddings}}},
          {"repr_mode", repr::ReprModeName(repr_mode)},
          {"k_top", k_top},
          {"embedding",
           {{"dim", embedding_dim},
            {"oov", oov_policy == repr::OovPolicy::kHashed ? "hashed" : "zeros"},
            {"seed", embedding_seed}}},
          {"cls_encoder", {{"checkpoint", cls_checkpoint}, {"config", cls_encoder.ToJson()}}},
          {"rod_passthrough_extra_columns", rod_passthrough_extra_columns},
          {"split",
           {{"train", split.train},
            {"val", split.val},
            {"test", split.test},
            {"seed", split_seed}}},
          {"window", er.window.ToJson()},
          {"thresholds", {{"ascertainment", asc_threshold}, {"relation", er.relation_threshold}}},
          {"asc", asc_json},
          {"er", er_json},
          {"ablation", {{"seed", ablation_seed}}}};
}

std::string PipelineConfig::ErModelDir() const {
  return registry + "/er_" + er::TrainModeName(er.mode) + "/" + run_id;
}

std::string PipelineConfig::AscModelDir() const {
  return registry + "/asc_" + asc::ClassifierKindName(asc.kind) + "/" + run_id;
}

}  // namespace kbc::service
