#include <fstream>
#include <sstream>

#include <json.hpp>

#include "pcup/error.hpp"
#include "pcup/training.hpp"

namespace pcup {

namespace {

using Json = nlohmann::ordered_json;

constexpr const char *kFormatTag = "pcup-checkpoint";

Json mlp_to_json(const MlpParams &mlp) {
  Json layers = Json::array();
  for (const auto &l : mlp.layers) {
    Json j;
    j["in"] = l.in_width();
    j["out"] = l.out_width();
    j["activation"] = std::string(to_string(l.activation));
    j["weight"] = l.weight.data;
    j["bias"] = l.bias;
    layers.push_back(std::move(j));
  }
  return layers;
}

MlpParams mlp_from_json(const Json &j) {
  if (!j.is_array())
    throw Error(ErrorCode::Corrupt, "layer list is not an array");
  MlpParams mlp;
  for (const auto &lj : j) {
    const auto in = lj.at("in").get<std::size_t>();
    const auto out = lj.at("out").get<std::size_t>();
    Layer l;
    l.weight = Matrix(out, in);
    l.weight.data = lj.at("weight").get<std::vector<double>>();
    l.bias = lj.at("bias").get<std::vector<double>>();
    l.activation = activation_from_string(lj.at("activation").get<std::string>());
    if (l.weight.data.size() != in * out || l.bias.size() != out)
      throw Error(ErrorCode::Corrupt, "layer buffer sizes do not match its shape");
    mlp.layers.push_back(std::move(l));
  }
  return mlp;
}

Json config_to_json(const TrainConfig &c) {
  Json j;
  j["epochs"] = c.epochs;
  j["threshold"] = c.threshold;
  j["learning_rate"] = c.learning_rate;
  j["batch_size"] = c.batch_size;
  j["queries_per_patch"] = c.queries_per_patch;
  j["query_sigma"] = c.query_sigma;
  j["max_steps"] = c.max_steps;
  j["curriculum"] = c.curriculum;
  j["rotate"] = c.rotate;
  j["seed"] = c.seed;
  j["feature_dim"] = c.feature_dim;
  j["hidden"] = c.hidden;
  j["sampling_steps"] = c.sampling_steps;
  j["curvature_k"] = c.curvature_k;
  j["normals_k"] = c.normals_k;
  j["sharpness"] = c.sharpness;
  j["lambda"] = c.step_size;
  j["iterations"] = c.iterations;
  j["sigma_seed"] = c.seed_sigma;
  return j;
}

TrainConfig config_from_json(const Json &j) {
  TrainConfig c;
  j.at("epochs").get_to(c.epochs);
  j.at("threshold").get_to(c.threshold);
  j.at("learning_rate").get_to(c.learning_rate);
  j.at("batch_size").get_to(c.batch_size);
  j.at("queries_per_patch").get_to(c.queries_per_patch);
  j.at("query_sigma").get_to(c.query_sigma);
  j.at("max_steps").get_to(c.max_steps);
  j.at("curriculum").get_to(c.curriculum);
  j.at("rotate").get_to(c.rotate);
  j.at("seed").get_to(c.seed);
  j.at("feature_dim").get_to(c.feature_dim);
  j.at("hidden").get_to(c.hidden);
  j.at("sampling_steps").get_to(c.sampling_steps);
  j.at("curvature_k").get_to(c.curvature_k);
  j.at("normals_k").get_to(c.normals_k);
  j.at("sharpness").get_to(c.sharpness);
  j.at("lambda").get_to(c.step_size);
  j.at("iterations").get_to(c.iterations);
  j.at("sigma_seed").get_to(c.seed_sigma);
  return c;
}

} // namespace

std::string checkpoint_to_json(const Checkpoint &ckpt) {
  const PlseModel &m = ckpt.model;
  Json j;
  j["format"] = kFormatTag;
  j["version"] = ckpt.format_version;
  Json model;
  model["version"] = m.version;
  model["feature_dim"] = m.feature_dim;
  model["hidden"] = m.hidden;
  model["sampling_steps"] = m.sampling_steps;
  model["curvature_k"] = m.curvature_k;
  model["normals_k"] = m.normals_k;
  model["sharpness"] = m.sharpness;
  model["encoder"] = mlp_to_json(m.encoder);
  model["estimator"] = mlp_to_json(m.estimator);
  j["model"] = std::move(model);
  j["config"] = config_to_json(ckpt.config);
  j["steps"] = ckpt.steps;
  return j.dump(1);
}

Checkpoint checkpoint_from_json(std::string_view text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::exception &e) {
    throw Error(ErrorCode::Corrupt, std::string("checkpoint is not valid JSON: ") + e.what());
  }
  if (!j.is_object() || !j.contains("format") || j["format"] != kFormatTag)
    throw Error(ErrorCode::Corrupt, "not a pcup checkpoint");
  if (!j.contains("version") || !j["version"].is_number_integer())
    throw Error(ErrorCode::Corrupt, "checkpoint has no integer version");
  const int version = j["version"].get<int>();
  if (version != kCheckpointVersion)
    throw Error(ErrorCode::VersionMismatch, "checkpoint version " + std::to_string(version) +
                                                " is not supported (expected " +
                                                std::to_string(kCheckpointVersion) + ")");
  Checkpoint ckpt;
  try {
    const Json &mj = j.at("model");
    PlseModel &m = ckpt.model;
    mj.at("version").get_to(m.version);
    mj.at("feature_dim").get_to(m.feature_dim);
    mj.at("hidden").get_to(m.hidden);
    mj.at("sampling_steps").get_to(m.sampling_steps);
    mj.at("curvature_k").get_to(m.curvature_k);
    mj.at("normals_k").get_to(m.normals_k);
    mj.at("sharpness").get_to(m.sharpness);
    m.encoder = mlp_from_json(mj.at("encoder"));
    m.estimator = mlp_from_json(mj.at("estimator"));
    ckpt.config = config_from_json(j.at("config"));
    j.at("steps").get_to(ckpt.steps);
    ckpt.format_version = version;
  } catch (const Json::exception &e) {
    throw Error(ErrorCode::Corrupt, std::string("checkpoint field error: ") + e.what());
  }
  if (ckpt.model.version != kModelVersion)
    throw Error(ErrorCode::VersionMismatch, "model version '" + ckpt.model.version + "' is not supported");
  try {
    ckpt.model.validate();
  } catch (const Error &e) {
    throw Error(ErrorCode::Corrupt, std::string("checkpoint model is inconsistent: ") + e.what());
  }
  return ckpt;
}

void save_checkpoint(const Checkpoint &ckpt, const std::filesystem::path &path) {
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw Error(ErrorCode::Io, "cannot open " + path.string() + " for writing");
  out << checkpoint_to_json(ckpt);
  out.close();
  if (!out)
    throw Error(ErrorCode::Io, "failed writing " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw Error(ErrorCode::Io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return checkpoint_from_json(ss.str());
}

} // namespace pcup
