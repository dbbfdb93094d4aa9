#include "pcup/training.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "pcup/error.hpp"
#include "pcup/format.hpp"

namespace pcup {

std::string_view to_string(Difficulty d) { return d == Difficulty::Hard ? "hard" : "easy"; }

Difficulty difficulty_from_string(std::string_view name) {
  if (name == "easy")
    return Difficulty::Easy;
  if (name == "hard")
    return Difficulty::Hard;
  throw Error(ErrorCode::Malformed, "difficulty must be 'easy' or 'hard', got '" + std::string(name) + "'");
}

std::string_view to_string(Phase p) {
  switch (p) {
  case Phase::Easy: return "easy";
  case Phase::Hard: return "hard";
  case Phase::All: return "all";
  }
  return "all";
}

void TrainConfig::validate() const {
  auto fail = [](const std::string &field, const std::string &why) {
    throw Error(ErrorCode::BadConfig, field + ": " + why);
  };
  if (epochs < 1)
    fail("epochs", "must be >= 1");
  if (!(threshold >= 0.0 && threshold <= 1.0))
    fail("threshold", "must be in [0, 1]");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate))
    fail("learning_rate", "must be positive");
  if (batch_size < 1)
    fail("batch_size", "must be >= 1");
  if (queries_per_patch < 1)
    fail("queries_per_patch", "must be >= 1");
  if (!(query_sigma >= 0.0) || !std::isfinite(query_sigma))
    fail("query_sigma", "must be >= 0");
  if (feature_dim < 1)
    fail("feature_dim", "must be >= 1");
  if (hidden < 1)
    fail("hidden", "must be >= 1");
  if (curvature_k < 1)
    fail("curvature_k", "must be >= 1");
  if (!(sharpness > 0.0) || !std::isfinite(sharpness))
    fail("sharpness", "must be positive");
  if (normals_k < 3)
    fail("normals_k", "must be >= 3");
  if (!(step_size > 0.0) || !std::isfinite(step_size))
    fail("lambda", "must be positive");
  if (!(seed_sigma >= 0.0) || !std::isfinite(seed_sigma))
    fail("sigma_seed", "must be >= 0");
}

TrainSample make_train_sample(PatchPair patch, const TrainConfig &config) {
  const CurvatureField field = compute_curvature(patch.sparse, config.curvature_k, config.normals_k);
  SamplingLadder ladder = curvature_sample(patch.sparse, field, config.sampling_steps);
  const double gcv = global_curvature(field);
  NeighborIndex index(patch.dense);
  return TrainSample{std::move(patch),
                     std::move(ladder),
                     std::move(index),
                     gcv,
                     curvature_skewness(field),
                     classify_difficulty(gcv, config.threshold)};
}

std::vector<QueryTarget> generate_queries(const PointCloud &sparse, const NeighborIndex &gt_index,
                                          std::size_t count, double sigma, std::mt19937_64 &rng) {
  if (sparse.empty())
    throw Error(ErrorCode::EmptyCloud, "queries need a non-empty sparse cloud");
  if (count < 1)
    throw Error(ErrorCode::BadCount, "query count must be >= 1");
  if (!(sigma >= 0.0))
    throw Error(ErrorCode::BadArgument, "query sigma must be >= 0");
  std::uniform_int_distribution<std::size_t> pick(0, sparse.size() - 1);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<QueryTarget> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    Point3 q = sparse[pick(rng)];
    if (sigma > 0.0) {
      const double dx = gauss(rng), dy = gauss(rng), dz = gauss(rng);
      q += Point3{dx, dy, dz} * sigma;
    }
    out.push_back({q, gt_index.nearest_distance(q)});
  }
  return out;
}

Difficulty classify_difficulty(double gcv, double threshold) {
  if (!(gcv >= 0.0 && gcv <= 1.0) || !(threshold >= 0.0 && threshold <= 1.0))
    throw Error(ErrorCode::OutOfRange, "global curvature and threshold must lie in [0, 1]");
  return gcv >= threshold ? Difficulty::Hard : Difficulty::Easy;
}

std::vector<EpochPlan> curriculum_schedule(std::span<const Difficulty> labels, std::size_t epochs,
                                           std::mt19937_64 &rng) {
  if (epochs < 1)
    throw Error(ErrorCode::BadCount, "schedule needs at least one epoch");
  std::vector<std::size_t> easy, hard, all(labels.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  for (std::size_t i = 0; i < labels.size(); ++i)
    (labels[i] == Difficulty::Hard ? hard : easy).push_back(i);
  if (easy.empty())
    easy = all;
  if (hard.empty())
    hard = all;

  const std::size_t easy_epochs = (epochs + 1) / 2;
  std::vector<EpochPlan> plan;
  plan.reserve(epochs);
  for (std::size_t e = 0; e < epochs; ++e) {
    const bool first = e < easy_epochs;
    EpochPlan p{first ? Phase::Easy : Phase::Hard, first ? easy : hard};
    std::shuffle(p.samples.begin(), p.samples.end(), rng);
    plan.push_back(std::move(p));
  }
  return plan;
}

std::vector<EpochPlan> uniform_schedule(std::size_t sample_count, std::size_t epochs, std::mt19937_64 &rng) {
  std::vector<std::size_t> all(sample_count);
  std::iota(all.begin(), all.end(), std::size_t{0});
  std::vector<EpochPlan> plan;
  plan.reserve(epochs);
  for (std::size_t e = 0; e < epochs; ++e) {
    EpochPlan p{Phase::All, all};
    std::shuffle(p.samples.begin(), p.samples.end(), rng);
    plan.push_back(std::move(p));
  }
  return plan;
}

void AdamOptimizer::step(PlseModel &model, const PlseGradients &grads) {
  std::vector<double> params = flatten_parameters(model);
  const std::vector<double> g = grads.flatten();
  if (m_.empty()) {
    m_.assign(params.size(), 0.0);
    v_.assign(params.size(), 0.0);
  }
  ++t_;
  const double c1 = 1.0 - std::pow(kBeta1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(kBeta2, static_cast<double>(t_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    m_[i] = kBeta1 * m_[i] + (1.0 - kBeta1) * g[i];
    v_[i] = kBeta2 * v_[i] + (1.0 - kBeta2) * g[i] * g[i];
    const double m_hat = m_[i] / c1;
    const double v_hat = v_[i] / c2;
    params[i] -= lr_ * m_hat / (std::sqrt(v_hat) + kEpsilon);
  }
  assign_parameters(model, params);
}

LossAndGradients l1_loss_and_gradients(const PlseModel &model, std::span<const BatchItem> batch) {
  if (batch.empty())
    throw Error(ErrorCode::BadCount, "empty batch");
  std::size_t total = 0;
  for (const auto &item : batch) {
    if (item.queries.size() != item.targets.size())
      throw Error(ErrorCode::BadArgument, "queries and targets differ in length");
    total += item.queries.size();
  }
  if (total == 0)
    throw Error(ErrorCode::BadCount, "batch has no queries");
  const double inv_total = 1.0 / static_cast<double>(total);

  LossAndGradients out{0.0, PlseGradients::zeros_like(model)};
  const std::size_t d = model.feature_dim;
  for (const auto &item : batch) {
    if (item.ladder->levels() != model.levels())
      throw Error(ErrorCode::LadderMismatch, "batch ladder does not match the model");
    std::vector<EncoderTape> tapes;
    std::vector<double> features;
    for (const auto &level : item.ladder->clouds) {
      tapes.push_back(encoder_forward(model, level));
      features.insert(features.end(), tapes.back().feature.begin(), tapes.back().feature.end());
    }
    const auto offset = estimator_feature_offset(model, features);
    const auto tape = estimator_forward(model, offset, item.queries);
    std::vector<double> d_out(item.queries.size());
    for (std::size_t b = 0; b < d_out.size(); ++b) {
      const double r = tape.output[b] - item.targets[b];
      out.loss += std::abs(r);
      d_out[b] = r > 0.0 ? inv_total : (r < 0.0 ? -inv_total : 0.0);
    }
    const auto back = estimator_backward(model, features, tape, d_out, &out.grads.estimator, true, false);
    for (std::size_t l = 0; l < tapes.size(); ++l)
      encoder_backward(model, tapes[l], std::span(back.d_features).subspan(l * d, d), out.grads.encoder);
  }
  out.loss *= inv_total;
  return out;
}

double train_step(PlseModel &model, AdamOptimizer &optimizer, std::span<const BatchItem> batch) {
  auto result = l1_loss_and_gradients(model, batch);
  if (!std::isfinite(result.loss))
    throw Error(ErrorCode::NonFiniteLoss, "loss became " + shortest(result.loss) + " at step " +
                                              std::to_string(optimizer.steps() + 1));
  for (double g : result.grads.flatten())
    if (!std::isfinite(g))
      throw Error(ErrorCode::NonFiniteLoss, "non-finite gradient at step " + std::to_string(optimizer.steps() + 1));
  optimizer.step(model, result.grads);
  return result.loss;
}

namespace {

struct EpochState {
  PointCloud sparse;
  SamplingLadder ladder;
  NeighborIndex gt_index;
};

EpochState rotated_state(const TrainSample &s, bool with_rotation, std::mt19937_64 &rng) {
  if (!with_rotation)
    return {s.patch.sparse, s.ladder, s.gt_index};
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double u1 = u(rng), u2 = u(rng), u3 = u(rng);
  const Rotation r = Rotation::from_uniform(u1, u2, u3);
  PointCloud sparse = pcup::rotate(s.patch.sparse, r);
  SamplingLadder ladder = reindex_ladder(s.ladder, sparse);
  return {std::move(sparse), std::move(ladder), NeighborIndex(pcup::rotate(s.patch.dense, r))};
}

} // namespace

TrainResult train(std::span<const PatchPair> dataset, const TrainConfig &config, const EpochCallback &on_epoch) {
  config.validate();
  if (dataset.empty())
    throw Error(ErrorCode::BadArgument, "training needs at least one patch");

  std::vector<TrainSample> samples;
  samples.reserve(dataset.size());
  std::vector<Difficulty> labels;
  for (const auto &p : dataset) {
    samples.push_back(make_train_sample(p, config));
    labels.push_back(samples.back().difficulty);
  }

  PlseModel model = init_model(config.feature_dim, config.sampling_steps, config.hidden, config.seed);
  model.curvature_k = config.curvature_k;
  model.normals_k = config.normals_k;
  model.sharpness = config.sharpness;

  std::mt19937_64 rng(config.seed ^ 0x9e3779b97f4a7c15ULL);
  const auto plan = config.curriculum ? curriculum_schedule(labels, config.epochs, rng)
                                      : uniform_schedule(samples.size(), config.epochs, rng);

  AdamOptimizer optimizer(config.learning_rate);
  TrainResult result;
  bool done = false;
  for (std::size_t e = 0; e < plan.size() && !done; ++e) {
    const EpochPlan &epoch = plan[e];
    std::vector<EpochState> states;
    states.reserve(epoch.samples.size());
    for (std::size_t idx : epoch.samples)
      states.push_back(rotated_state(samples[idx], config.rotate, rng));

    double loss_sum = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < states.size() && !done; start += config.batch_size) {
      const std::size_t end = std::min(states.size(), start + config.batch_size);
      std::vector<BatchItem> batch;
      batch.reserve(end - start);
      for (std::size_t i = start; i < end; ++i) {
        const auto qt = generate_queries(states[i].sparse, states[i].gt_index, config.queries_per_patch,
                                         config.query_sigma, rng);
        BatchItem item;
        item.ladder = &states[i].ladder;
        for (const auto &x : qt) {
          item.queries.push_back(x.query);
          item.targets.push_back(x.target);
        }
        batch.push_back(std::move(item));
      }
      loss_sum += train_step(model, optimizer, batch);
      ++batches;
      if (config.max_steps > 0 && optimizer.steps() >= config.max_steps)
        done = true;
    }
    EpochLoss entry{e + 1, epoch.phase, batches ? loss_sum / static_cast<double>(batches) : 0.0};
    result.trace.push_back(entry);
    if (on_epoch)
      on_epoch(entry);
  }
  result.checkpoint = Checkpoint{std::move(model), config, optimizer.steps(), kCheckpointVersion};
  return result;
}

std::string format_loss_trace_csv(std::span<const EpochLoss> trace) {
  std::string out = "epoch,phase,mean_loss\n";
  for (const auto &e : trace)
    out += std::to_string(e.epoch) + "," + std::string(to_string(e.phase)) + "," + shortest(e.mean_loss) + "\n";
  return out;
}

} // namespace pcup
