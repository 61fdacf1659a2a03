// Single-hidden-layer sigmoid autoencoder trained by backpropagation on
// flattened normalized feature matrices, with a softmax output layer
// trained by cross-entropy on the frozen encodings.
//
// Decoder outputs are sigmoid-bounded, so pipeline inputs are affinely
// squashed per dimension into [0.1, 0.9] over the training set and the
// reconstruction target is the squashed input.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <utility>
#include <vector>

#include <json.hpp>

#include "pmuevent/dataset_io.hpp"
#include "pmuevent/features.hpp"
#include "pmuevent/phasor.hpp"
#include "pmuevent/rng.hpp"

namespace pmuevent {

inline double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

struct AutoencoderParams {
  int d = 0;   // input/output width
  int dh = 0;  // hidden width
  std::vector<double> w_enc;  // dh x d, row-major
  std::vector<double> b_enc;  // dh
  std::vector<double> w_dec;  // d x dh, row-major
  std::vector<double> b_dec;  // d
};

struct SoftmaxParams {
  int dh = 0;
  std::vector<double> w;  // 3 x dh, row-major
  std::vector<double> b;  // 3
};

struct TrainConfig {
  double learning_rate = 0.05;
  int epochs_ae = 200;
  int epochs_softmax = 200;
  int batch_size = 16;
  double l2 = 1e-4;
  int fine_tune_epochs = 0;  // joint encoder+softmax cross-entropy passes
  std::uint64_t seed = 0;
};

inline void validate_train_config(const TrainConfig& cfg) {
  if (!(cfg.learning_rate > 0.0) || cfg.batch_size < 1 || cfg.epochs_ae < 0 ||
      cfg.epochs_softmax < 0 || cfg.fine_tune_epochs < 0 || !(cfg.l2 >= 0.0))
    throw std::invalid_argument("bad training configuration");
}

inline std::vector<double> encode(const AutoencoderParams& p, const std::vector<double>& x) {
  if (static_cast<int>(x.size()) != p.d)
    throw std::invalid_argument("encode: input length must equal d");
  std::vector<double> z(p.dh);
  for (int h = 0; h < p.dh; ++h) {
    double acc = p.b_enc[h];
    const double* row = p.w_enc.data() + static_cast<std::size_t>(h) * p.d;
    for (int j = 0; j < p.d; ++j) acc += row[j] * x[j];
    z[h] = sigmoid(acc);
  }
  return z;
}

inline std::vector<double> decode(const AutoencoderParams& p, const std::vector<double>& z) {
  if (static_cast<int>(z.size()) != p.dh)
    throw std::invalid_argument("decode: input length must equal dh");
  std::vector<double> x(p.d);
  for (int i = 0; i < p.d; ++i) {
    double acc = p.b_dec[i];
    const double* row = p.w_dec.data() + static_cast<std::size_t>(i) * p.dh;
    for (int h = 0; h < p.dh; ++h) acc += row[h] * z[h];
    x[i] = sigmoid(acc);
  }
  return x;
}

inline std::vector<double> reconstruct(const AutoencoderParams& p,
                                       const std::vector<double>& x) {
  return decode(p, encode(p, x));
}

// Mean squared entry error of the reconstructions against the inputs.
inline double reconstruction_error(const AutoencoderParams& p,
                                   const std::vector<std::vector<double>>& data) {
  if (data.empty()) throw std::invalid_argument("reconstruction_error: empty data");
  double sum = 0.0;
  for (const auto& x : data) {
    const std::vector<double> r = reconstruct(p, x);
    for (int i = 0; i < p.d; ++i) {
      const double e = r[i] - x[i];
      sum += e * e;
    }
  }
  return sum / (static_cast<double>(data.size()) * p.d);
}

struct AeGradients {
  std::vector<double> w_enc, b_enc, w_dec, b_dec;
};

// Batch loss: mean over the batch of 1/2 |x' - x|^2, plus (l2/2) times the
// squared Frobenius norms of both weight matrices. Biases unregularized.
inline double ae_batch_loss(const AutoencoderParams& p,
                            const std::vector<std::vector<double>>& data,
                            const std::vector<std::size_t>& idx, double l2) {
  double loss = 0.0;
  for (std::size_t i : idx) {
    const std::vector<double> r = reconstruct(p, data[i]);
    for (int k = 0; k < p.d; ++k) {
      const double e = r[k] - data[i][k];
      loss += 0.5 * e * e;
    }
  }
  loss /= static_cast<double>(idx.size());
  double reg = 0.0;
  for (double w : p.w_enc) reg += w * w;
  for (double w : p.w_dec) reg += w * w;
  return loss + 0.5 * l2 * reg;
}

inline AeGradients ae_batch_gradients(const AutoencoderParams& p,
                                      const std::vector<std::vector<double>>& data,
                                      const std::vector<std::size_t>& idx, double l2) {
  AeGradients g;
  g.w_enc.assign(p.w_enc.size(), 0.0);
  g.b_enc.assign(p.b_enc.size(), 0.0);
  g.w_dec.assign(p.w_dec.size(), 0.0);
  g.b_dec.assign(p.b_dec.size(), 0.0);
  std::vector<double> delta_hidden(p.dh);
  for (std::size_t i : idx) {
    const std::vector<double>& x = data[i];
    const std::vector<double> z = encode(p, x);
    const std::vector<double> r = decode(p, z);
    std::fill(delta_hidden.begin(), delta_hidden.end(), 0.0);
    for (int k = 0; k < p.d; ++k) {
      const double delta_out = (r[k] - x[k]) * r[k] * (1.0 - r[k]);
      g.b_dec[k] += delta_out;
      double* grow = g.w_dec.data() + static_cast<std::size_t>(k) * p.dh;
      const double* wrow = p.w_dec.data() + static_cast<std::size_t>(k) * p.dh;
      for (int h = 0; h < p.dh; ++h) {
        grow[h] += delta_out * z[h];
        delta_hidden[h] += delta_out * wrow[h];
      }
    }
    for (int h = 0; h < p.dh; ++h) {
      const double dh = delta_hidden[h] * z[h] * (1.0 - z[h]);
      g.b_enc[h] += dh;
      double* grow = g.w_enc.data() + static_cast<std::size_t>(h) * p.d;
      for (int j = 0; j < p.d; ++j) grow[j] += dh * x[j];
    }
  }
  const double inv = 1.0 / static_cast<double>(idx.size());
  for (auto& v : g.w_enc) v *= inv;
  for (auto& v : g.b_enc) v *= inv;
  for (auto& v : g.w_dec) v *= inv;
  for (auto& v : g.b_dec) v *= inv;
  for (std::size_t k = 0; k < p.w_enc.size(); ++k) g.w_enc[k] += l2 * p.w_enc[k];
  for (std::size_t k = 0; k < p.w_dec.size(); ++k) g.w_dec[k] += l2 * p.w_dec[k];
  return g;
}

// Seeded uniform [-r, r] initialization with r = sqrt(6 / (d + dh)).
inline AutoencoderParams ae_init(int d, int dh, std::uint64_t seed) {
  if (d < 1 || dh < 1) throw std::invalid_argument("ae_init: widths must be positive");
  AutoencoderParams p;
  p.d = d;
  p.dh = dh;
  const double r = std::sqrt(6.0 / (d + dh));
  Rng rng(mix_seed(seed, 0xae01ull));
  const auto fill = [&](std::vector<double>& v, std::size_t n) {
    v.resize(n);
    for (auto& w : v) w = rng.uniform(-r, r);
  };
  fill(p.w_enc, static_cast<std::size_t>(dh) * d);
  fill(p.b_enc, static_cast<std::size_t>(dh));
  fill(p.w_dec, static_cast<std::size_t>(d) * dh);
  fill(p.b_dec, static_cast<std::size_t>(d));
  return p;
}

namespace detail {

// Mini-batch epochs over a shuffled index order; step() consumes one batch.
template <typename Step>
void run_epochs(std::size_t n, int epochs, int batch_size, std::uint64_t shuffle_seed,
                Step&& step) {
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::vector<std::size_t> batch;
  for (int e = 0; e < epochs; ++e) {
    Rng rng(mix_seed(shuffle_seed, static_cast<std::uint64_t>(e)));
    shuffle(order, rng);
    for (std::size_t at = 0; at < n; at += batch_size) {
      batch.assign(order.begin() + at,
                   order.begin() + std::min(n, at + batch_size));
      step(batch);
    }
  }
}

inline void axpy(std::vector<double>& x, const std::vector<double>& g, double a) {
  for (std::size_t i = 0; i < x.size(); ++i) x[i] += a * g[i];
}

}  // namespace detail

// Mini-batch gradient descent on the reconstruction loss. Deterministic
// given cfg.seed; epochs_ae = 0 returns the seeded initialization.
inline AutoencoderParams ae_train(const std::vector<std::vector<double>>& data,
                                  const TrainConfig& cfg, int dh) {
  validate_train_config(cfg);
  if (data.empty()) throw std::invalid_argument("ae_train: empty training data");
  const int d = static_cast<int>(data[0].size());
  for (const auto& x : data)
    if (static_cast<int>(x.size()) != d)
      throw std::invalid_argument("ae_train: inputs must share one length");
  AutoencoderParams p = ae_init(d, dh, cfg.seed);
  detail::run_epochs(data.size(), cfg.epochs_ae, cfg.batch_size,
                     mix_seed(cfg.seed, 0x5410ull), [&](const std::vector<std::size_t>& batch) {
                       const AeGradients g = ae_batch_gradients(p, data, batch, cfg.l2);
                       detail::axpy(p.w_enc, g.w_enc, -cfg.learning_rate);
                       detail::axpy(p.b_enc, g.b_enc, -cfg.learning_rate);
                       detail::axpy(p.w_dec, g.w_dec, -cfg.learning_rate);
                       detail::axpy(p.b_dec, g.b_dec, -cfg.learning_rate);
                     });
  return p;
}

// Numerically safe softmax (max subtraction). Outputs sum to 1.
inline std::vector<double> softmax(const std::vector<double>& x) {
  if (x.empty()) throw std::invalid_argument("softmax: empty input");
  const double m = *std::max_element(x.begin(), x.end());
  std::vector<double> p(x.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    p[i] = std::exp(x[i] - m);
    sum += p[i];
  }
  for (auto& v : p) v /= sum;
  return p;
}

inline std::vector<double> softmax_logits(const SoftmaxParams& sm,
                                          const std::vector<double>& z) {
  if (static_cast<int>(z.size()) != sm.dh)
    throw std::invalid_argument("softmax_logits: encoding length must equal dh");
  std::vector<double> logits(3);
  for (int c = 0; c < 3; ++c) {
    double acc = sm.b[c];
    const double* row = sm.w.data() + static_cast<std::size_t>(c) * sm.dh;
    for (int h = 0; h < sm.dh; ++h) acc += row[h] * z[h];
    logits[c] = acc;
  }
  return logits;
}

struct SoftmaxGradients {
  std::vector<double> w, b;
};

// Batch loss: mean cross-entropy plus (l2/2) |w|^2.
inline double softmax_batch_loss(const SoftmaxParams& sm,
                                 const std::vector<std::vector<double>>& z,
                                 const std::vector<EventClass>& y,
                                 const std::vector<std::size_t>& idx, double l2) {
  double loss = 0.0;
  for (std::size_t i : idx) {
    const std::vector<double> p = softmax(softmax_logits(sm, z[i]));
    loss -= std::log(std::max(p[class_code(y[i]) - 1], 1e-300));
  }
  loss /= static_cast<double>(idx.size());
  double reg = 0.0;
  for (double w : sm.w) reg += w * w;
  return loss + 0.5 * l2 * reg;
}

inline SoftmaxGradients softmax_batch_gradients(const SoftmaxParams& sm,
                                                const std::vector<std::vector<double>>& z,
                                                const std::vector<EventClass>& y,
                                                const std::vector<std::size_t>& idx,
                                                double l2) {
  SoftmaxGradients g;
  g.w.assign(sm.w.size(), 0.0);
  g.b.assign(sm.b.size(), 0.0);
  for (std::size_t i : idx) {
    const std::vector<double> p = softmax(softmax_logits(sm, z[i]));
    for (int c = 0; c < 3; ++c) {
      const double delta = p[c] - (class_code(y[i]) - 1 == c ? 1.0 : 0.0);
      g.b[c] += delta;
      double* grow = g.w.data() + static_cast<std::size_t>(c) * sm.dh;
      for (int h = 0; h < sm.dh; ++h) grow[h] += delta * z[i][h];
    }
  }
  const double inv = 1.0 / static_cast<double>(idx.size());
  for (auto& v : g.w) v *= inv;
  for (auto& v : g.b) v *= inv;
  for (std::size_t k = 0; k < sm.w.size(); ++k) g.w[k] += l2 * sm.w[k];
  return g;
}

inline SoftmaxParams softmax_init(int dh, std::uint64_t seed) {
  SoftmaxParams sm;
  sm.dh = dh;
  const double r = std::sqrt(6.0 / (dh + 3));
  Rng rng(mix_seed(seed, 0x50f7ull));
  sm.w.resize(3 * static_cast<std::size_t>(dh));
  sm.b.resize(3);
  for (auto& w : sm.w) w = rng.uniform(-r, r);
  for (auto& b : sm.b) b = rng.uniform(-r, r);
  return sm;
}

// Mini-batch gradient descent on mean cross-entropy over encodings.
inline SoftmaxParams softmax_train(const std::vector<std::vector<double>>& encodings,
                                   const std::vector<EventClass>& labels,
                                   const TrainConfig& cfg) {
  validate_train_config(cfg);
  if (encodings.empty() || encodings.size() != labels.size())
    throw std::invalid_argument("softmax_train: inputs empty or mismatched");
  const int dh = static_cast<int>(encodings[0].size());
  SoftmaxParams sm = softmax_init(dh, cfg.seed);
  detail::run_epochs(encodings.size(), cfg.epochs_softmax, cfg.batch_size,
                     mix_seed(cfg.seed, 0x5411ull), [&](const std::vector<std::size_t>& batch) {
                       const SoftmaxGradients g =
                           softmax_batch_gradients(sm, encodings, labels, batch, cfg.l2);
                       detail::axpy(sm.w, g.w, -cfg.learning_rate);
                       detail::axpy(sm.b, g.b, -cfg.learning_rate);
                     });
  return sm;
}

// Joint cross-entropy fine-tuning of encoder + softmax (decoder frozen).
// Off by default; enabled through cfg.fine_tune_epochs.
inline double fine_tune_batch_loss(const AutoencoderParams& p, const SoftmaxParams& sm,
                                   const std::vector<std::vector<double>>& data,
                                   const std::vector<EventClass>& y,
                                   const std::vector<std::size_t>& idx, double l2) {
  double loss = 0.0;
  for (std::size_t i : idx) {
    const std::vector<double> prob = softmax(softmax_logits(sm, encode(p, data[i])));
    loss -= std::log(std::max(prob[class_code(y[i]) - 1], 1e-300));
  }
  loss /= static_cast<double>(idx.size());
  double reg = 0.0;
  for (double w : sm.w) reg += w * w;
  for (double w : p.w_enc) reg += w * w;
  return loss + 0.5 * l2 * reg;
}

inline void fine_tune_step(AutoencoderParams& p, SoftmaxParams& sm,
                           const std::vector<std::vector<double>>& data,
                           const std::vector<EventClass>& y,
                           const std::vector<std::size_t>& idx, double l2, double lr) {
  SoftmaxGradients gs;
  gs.w.assign(sm.w.size(), 0.0);
  gs.b.assign(sm.b.size(), 0.0);
  std::vector<double> gw_enc(p.w_enc.size(), 0.0), gb_enc(p.b_enc.size(), 0.0);
  std::vector<double> delta_hidden(p.dh);
  for (std::size_t i : idx) {
    const std::vector<double>& x = data[i];
    const std::vector<double> z = encode(p, x);
    const std::vector<double> prob = softmax(softmax_logits(sm, z));
    std::fill(delta_hidden.begin(), delta_hidden.end(), 0.0);
    for (int c = 0; c < 3; ++c) {
      const double delta = prob[c] - (class_code(y[i]) - 1 == c ? 1.0 : 0.0);
      gs.b[c] += delta;
      double* grow = gs.w.data() + static_cast<std::size_t>(c) * sm.dh;
      const double* wrow = sm.w.data() + static_cast<std::size_t>(c) * sm.dh;
      for (int h = 0; h < p.dh; ++h) {
        grow[h] += delta * z[h];
        delta_hidden[h] += delta * wrow[h];
      }
    }
    for (int h = 0; h < p.dh; ++h) {
      const double dh = delta_hidden[h] * z[h] * (1.0 - z[h]);
      gb_enc[h] += dh;
      double* grow = gw_enc.data() + static_cast<std::size_t>(h) * p.d;
      for (int j = 0; j < p.d; ++j) grow[j] += dh * x[j];
    }
  }
  const double inv = 1.0 / static_cast<double>(idx.size());
  for (auto& v : gs.w) v *= inv;
  for (auto& v : gs.b) v *= inv;
  for (auto& v : gw_enc) v *= inv;
  for (auto& v : gb_enc) v *= inv;
  for (std::size_t k = 0; k < sm.w.size(); ++k) gs.w[k] += l2 * sm.w[k];
  for (std::size_t k = 0; k < p.w_enc.size(); ++k) gw_enc[k] += l2 * p.w_enc[k];
  detail::axpy(sm.w, gs.w, -lr);
  detail::axpy(sm.b, gs.b, -lr);
  detail::axpy(p.w_enc, gw_enc, -lr);
  detail::axpy(p.b_enc, gb_enc, -lr);
}

inline std::pair<EventClass, std::array<double, 3>> classify(
    const AutoencoderParams& p, const SoftmaxParams& sm, const std::vector<double>& x) {
  const std::vector<double> prob = softmax(softmax_logits(sm, encode(p, x)));
  int best = 0;
  for (int c = 1; c < 3; ++c)
    if (prob[c] > prob[best]) best = c;
  return {class_from_code(best + 1), {prob[0], prob[1], prob[2]}};
}

// Affine per-dimension squash of training vectors into [0.1, 0.9];
// constant dimensions map to 0.5.
struct SquashParams {
  std::vector<double> scale, offset;

  static SquashParams fit(const std::vector<std::vector<double>>& xs) {
    if (xs.empty()) throw std::invalid_argument("squash fit: empty training set");
    const std::size_t d = xs[0].size();
    std::vector<double> lo(d, std::numeric_limits<double>::infinity());
    std::vector<double> hi(d, -std::numeric_limits<double>::infinity());
    for (const auto& x : xs)
      for (std::size_t j = 0; j < d; ++j) {
        lo[j] = std::min(lo[j], x[j]);
        hi[j] = std::max(hi[j], x[j]);
      }
    SquashParams sq;
    sq.scale.resize(d);
    sq.offset.resize(d);
    for (std::size_t j = 0; j < d; ++j) {
      const double range = hi[j] - lo[j];
      if (range < 1e-12) {
        sq.scale[j] = 0.0;
        sq.offset[j] = 0.5;
      } else {
        sq.scale[j] = 0.8 / range;
        sq.offset[j] = 0.1 - 0.8 * lo[j] / range;
      }
    }
    return sq;
  }

  std::vector<double> apply(const std::vector<double>& x) const {
    std::vector<double> s(x.size());
    for (std::size_t j = 0; j < x.size(); ++j) s[j] = scale[j] * x[j] + offset[j];
    return s;
  }
};

// --- record-level pipeline ----------------------------------------------

struct AeSoftmaxModel {
  int sps = 0;
  int d = 0;
  int hidden = 50;
  NormStats norm;
  SquashParams squash;
  AutoencoderParams ae;
  SoftmaxParams sm;
  TrainConfig cfg;
};

inline AeSoftmaxModel train_ae_softmax(const std::vector<const EventRecord*>& train,
                                       const TrainConfig& cfg, int hidden, int sps) {
  validate_train_config(cfg);
  if (train.empty()) throw std::invalid_argument("train_ae_softmax: empty training set");
  std::vector<FeatureMatrix> mats;
  mats.reserve(train.size());
  for (const EventRecord* r : train) mats.push_back(build_feature_matrix(*r));

  AeSoftmaxModel model;
  model.sps = sps;
  model.hidden = hidden;
  model.cfg = cfg;
  model.norm = fit_norm_stats(mats);

  std::vector<std::vector<double>> vecs(mats.size());
  for (std::size_t i = 0; i < mats.size(); ++i)
    vecs[i] = normalize_and_flatten(mats[i], model.norm);
  model.d = static_cast<int>(vecs[0].size());
  model.squash = SquashParams::fit(vecs);
  for (auto& v : vecs) v = model.squash.apply(v);

  model.ae = ae_train(vecs, cfg, hidden);

  std::vector<std::vector<double>> encodings(vecs.size());
  for (std::size_t i = 0; i < vecs.size(); ++i) encodings[i] = encode(model.ae, vecs[i]);
  std::vector<EventClass> labels(train.size());
  for (std::size_t i = 0; i < train.size(); ++i) labels[i] = train[i]->label;
  model.sm = softmax_train(encodings, labels, cfg);

  if (cfg.fine_tune_epochs > 0) {
    detail::run_epochs(vecs.size(), cfg.fine_tune_epochs, cfg.batch_size,
                       mix_seed(cfg.seed, 0x5412ull),
                       [&](const std::vector<std::size_t>& batch) {
                         fine_tune_step(model.ae, model.sm, vecs, labels, batch, cfg.l2,
                                        cfg.learning_rate);
                       });
  }
  return model;
}

inline std::pair<EventClass, std::array<double, 3>> ae_softmax_predict(
    const AeSoftmaxModel& m, const EventRecord& r) {
  const std::vector<double> v =
      m.squash.apply(normalize_and_flatten(build_feature_matrix(r), m.norm));
  return classify(m.ae, m.sm, v);
}

// --- model file round trip ----------------------------------------------

inline constexpr int kAeModelSchemaVersion = 1;

inline nlohmann::json ae_softmax_to_json(const AeSoftmaxModel& m) {
  nlohmann::json j;
  j["schema_version"] = kAeModelSchemaVersion;
  j["kind"] = "ae-softmax";
  j["sps"] = m.sps;
  j["d"] = m.d;
  j["hidden"] = m.hidden;
  j["norm"] = {{"mean", m.norm.mean}, {"std", m.norm.std}};
  j["squash"] = {{"scale", m.squash.scale}, {"offset", m.squash.offset}};
  j["ae"] = {{"w_enc", m.ae.w_enc},
             {"b_enc", m.ae.b_enc},
             {"w_dec", m.ae.w_dec},
             {"b_dec", m.ae.b_dec}};
  j["softmax"] = {{"w", m.sm.w}, {"b", m.sm.b}};
  j["train"] = {{"learning_rate", m.cfg.learning_rate},
                {"epochs_ae", m.cfg.epochs_ae},
                {"epochs_softmax", m.cfg.epochs_softmax},
                {"batch_size", m.cfg.batch_size},
                {"l2", m.cfg.l2},
                {"fine_tune_epochs", m.cfg.fine_tune_epochs},
                {"seed", m.cfg.seed}};
  return j;
}

inline AeSoftmaxModel ae_softmax_from_json(const nlohmann::json& j) {
  if (j.at("schema_version").get<int>() != kAeModelSchemaVersion)
    throw IoError("unsupported ae model schema version");
  AeSoftmaxModel m;
  m.sps = j.at("sps").get<int>();
  m.d = j.at("d").get<int>();
  m.hidden = j.at("hidden").get<int>();
  m.norm.mean = j.at("norm").at("mean").get<std::array<double, kFeatureCols>>();
  m.norm.std = j.at("norm").at("std").get<std::array<double, kFeatureCols>>();
  m.squash.scale = j.at("squash").at("scale").get<std::vector<double>>();
  m.squash.offset = j.at("squash").at("offset").get<std::vector<double>>();
  m.ae.d = m.d;
  m.ae.dh = m.hidden;
  m.ae.w_enc = j.at("ae").at("w_enc").get<std::vector<double>>();
  m.ae.b_enc = j.at("ae").at("b_enc").get<std::vector<double>>();
  m.ae.w_dec = j.at("ae").at("w_dec").get<std::vector<double>>();
  m.ae.b_dec = j.at("ae").at("b_dec").get<std::vector<double>>();
  m.sm.dh = m.hidden;
  m.sm.w = j.at("softmax").at("w").get<std::vector<double>>();
  m.sm.b = j.at("softmax").at("b").get<std::vector<double>>();
  const auto& t = j.at("train");
  m.cfg.learning_rate = t.at("learning_rate").get<double>();
  m.cfg.epochs_ae = t.at("epochs_ae").get<int>();
  m.cfg.epochs_softmax = t.at("epochs_softmax").get<int>();
  m.cfg.batch_size = t.at("batch_size").get<int>();
  m.cfg.l2 = t.at("l2").get<double>();
  m.cfg.fine_tune_epochs = t.at("fine_tune_epochs").get<int>();
  m.cfg.seed = t.at("seed").get<std::uint64_t>();
  return m;
}

inline void save_ae_softmax(const AeSoftmaxModel& m, const std::filesystem::path& path) {
  atomic_write_file(path, ae_softmax_to_json(m).dump() + "\n");
}

inline AeSoftmaxModel load_ae_softmax(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open model: " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("bad model file: ") + e.what());
  }
  return ae_softmax_from_json(j);
}

}  // namespace pmuevent
