#include "oreal/model.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "oreal/metrics.hpp"

namespace oreal {

namespace {

struct Samples {
  std::vector<double> x;  // [n][kParamDim], bias column = 1
  std::vector<ClassId> y;
  std::size_t size() const { return y.size(); }
};

Samples gather(const TrainingData& data, std::size_t num_classes) {
  if (data.features.size() != data.labels.size()) {
    throw Error(ErrorKind::ShapeMismatch, "feature and label image counts differ");
  }
  Samples out;
  for (std::size_t img = 0; img < data.features.size(); ++img) {
    const auto& f = data.features[img];
    const auto& l = data.labels[img];
    if (f.height != l.height || f.width != l.width || l.labels.size() != f.pixel_count()) {
      throw Error(ErrorKind::ShapeMismatch, "feature map and label map shapes differ");
    }
    for (std::size_t p = 0; p < l.labels.size(); ++p) {
      const ClassId label = l.labels[p];
      if (label == kUnlabeled) continue;
      if (label < 0 || static_cast<std::size_t>(label) >= num_classes) {
        throw Error(ErrorKind::InvalidArgument, "training label outside [0, C)");
      }
      const auto row = f.pixel(p);
      out.x.insert(out.x.end(), row.begin(), row.end());
      out.x.push_back(1.0);
      out.y.push_back(label);
    }
  }
  return out;
}

double loss_and_gradient(std::span<const double> w, std::size_t classes, const Samples& s,
                         std::vector<double>* grad) {
  if (grad) grad->assign(classes * kParamDim, 0.0);
  std::vector<double> logits(classes);
  double loss = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double* x = s.x.data() + i * kParamDim;
    double top = -std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < classes; ++c) {
      const double* wc = w.data() + c * kParamDim;
      double z = 0.0;
      for (std::size_t d = 0; d < kParamDim; ++d) z += wc[d] * x[d];
      logits[c] = z;
      top = std::max(top, z);
    }
    double norm = 0.0;
    for (std::size_t c = 0; c < classes; ++c) {
      logits[c] = std::exp(logits[c] - top);
      norm += logits[c];
    }
    const auto target = static_cast<std::size_t>(s.y[i]);
    loss -= std::log(logits[target] / norm);
    if (grad) {
      for (std::size_t c = 0; c < classes; ++c) {
        const double residual = logits[c] / norm - (c == target ? 1.0 : 0.0);
        double* gc = grad->data() + c * kParamDim;
        for (std::size_t d = 0; d < kParamDim; ++d) gc[d] += residual * x[d];
      }
    }
  }
  const double n = static_cast<double>(s.size());
  if (grad) {
    for (auto& g : *grad) g /= n;
  }
  return loss / n;
}

// Per-feature affine map to zero mean / unit variance over the training
// samples. Training runs in the standardized space; weights are mapped back
// to raw features on the way out, so logits are unchanged.
struct Standardizer {
  std::array<double, kFeatureDim> mean{};
  std::array<double, kFeatureDim> scale{};

  static Standardizer fit(const Samples& s) {
    Standardizer out;
    const double n = static_cast<double>(s.size());
    std::array<double, kFeatureDim> sq{};
    for (std::size_t i = 0; i < s.size(); ++i) {
      const double* x = s.x.data() + i * kParamDim;
      for (std::size_t d = 0; d < kFeatureDim; ++d) {
        out.mean[d] += x[d];
        sq[d] += x[d] * x[d];
      }
    }
    for (std::size_t d = 0; d < kFeatureDim; ++d) {
      out.mean[d] /= n;
      const double var = std::max(0.0, sq[d] / n - out.mean[d] * out.mean[d]);
      out.scale[d] = var > 1e-12 ? std::sqrt(var) : 1.0;
    }
    return out;
  }

  void apply(Samples& s) const {
    for (std::size_t i = 0; i < s.size(); ++i) {
      double* x = s.x.data() + i * kParamDim;
      for (std::size_t d = 0; d < kFeatureDim; ++d) x[d] = (x[d] - mean[d]) / scale[d];
    }
  }

  std::vector<double> to_standard(std::span<const double> raw, std::size_t classes) const {
    std::vector<double> out(raw.begin(), raw.end());
    for (std::size_t c = 0; c < classes; ++c) {
      double* w = out.data() + c * kParamDim;
      for (std::size_t d = 0; d < kFeatureDim; ++d) {
        w[kFeatureDim] += w[d] * mean[d];
        w[d] *= scale[d];
      }
    }
    return out;
  }

  std::vector<double> to_raw(std::span<const double> standard, std::size_t classes) const {
    std::vector<double> out(standard.begin(), standard.end());
    for (std::size_t c = 0; c < classes; ++c) {
      double* w = out.data() + c * kParamDim;
      for (std::size_t d = 0; d < kFeatureDim; ++d) {
        w[d] /= scale[d];
        w[kFeatureDim] -= w[d] * mean[d];
      }
    }
    return out;
  }
};

ClassId decide(std::span<const double> w, std::size_t classes, std::span<const double> f) {
  ClassId best = 0;
  double best_z = -std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < classes; ++c) {
    const double* wc = w.data() + c * kParamDim;
    double z = wc[kFeatureDim];
    for (std::size_t d = 0; d < kFeatureDim; ++d) z += wc[d] * f[d];
    if (z > best_z) {
      best_z = z;
      best = static_cast<ClassId>(c);
    }
  }
  return best;
}

double validation_miou(std::span<const double> w, std::size_t classes,
                       const ValidationData& validation) {
  ConfusionMatrix cm(classes);
  for (std::size_t img = 0; img < validation.features.size(); ++img) {
    const auto& f = validation.features[img];
    LabelMap pred(f.height, f.width, 0);
    for (std::size_t p = 0; p < f.pixel_count(); ++p) pred.labels[p] = decide(w, classes, f.pixel(p));
    cm.add(pred, validation.masks[img]);
  }
  return cm.miou();
}

}  // namespace

PixelFeatures extract_features(const Image& image) {
  const std::size_t h = image.height;
  const std::size_t w = image.width;
  PixelFeatures out;
  out.height = h;
  out.width = w;
  out.values.assign(h * w * kFeatureDim, 0.0);
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      const std::size_t p = y * w + x;
      double* f = out.values.data() + p * kFeatureDim;
      for (int ch = 0; ch < 3; ++ch) f[ch] = image.at(p, ch);
      f[3] = w > 1 ? static_cast<double>(x) / static_cast<double>(w - 1) : 0.0;
      f[4] = h > 1 ? static_cast<double>(y) / static_cast<double>(h - 1) : 0.0;
      double sum[3] = {0.0, 0.0, 0.0};
      double sq[3] = {0.0, 0.0, 0.0};
      for (int dy = -1; dy <= 1; ++dy) {
        const std::size_t yy = static_cast<std::size_t>(
            std::clamp<long>(static_cast<long>(y) + dy, 0, static_cast<long>(h) - 1));
        for (int dx = -1; dx <= 1; ++dx) {
          const std::size_t xx = static_cast<std::size_t>(
              std::clamp<long>(static_cast<long>(x) + dx, 0, static_cast<long>(w) - 1));
          for (int ch = 0; ch < 3; ++ch) {
            const double v = image.at(yy * w + xx, ch);
            sum[ch] += v;
            sq[ch] += v * v;
          }
        }
      }
      for (int ch = 0; ch < 3; ++ch) {
        const double mean = sum[ch] / 9.0;
        f[5 + ch] = mean;
        f[8 + ch] = std::sqrt(std::max(0.0, sq[ch] / 9.0 - mean * mean));
      }
    }
  }
  return out;
}

ClassifierWeights ClassifierWeights::zeros(std::size_t num_classes) {
  ClassifierWeights w;
  w.num_classes = num_classes;
  w.weights.assign(num_classes * kParamDim, 0.0);
  w.shadow = w.weights;
  return w;
}

LossAndGradient cross_entropy(std::span<const double> weights, std::size_t num_classes,
                              const TrainingData& data) {
  if (weights.size() != num_classes * kParamDim) {
    throw Error(ErrorKind::ShapeMismatch, "weight vector does not match C x kParamDim");
  }
  const Samples samples = gather(data, num_classes);
  if (samples.size() == 0) throw Error(ErrorKind::NoLabels, "no labeled pixels");
  LossAndGradient out;
  out.samples = samples.size();
  out.loss = loss_and_gradient(weights, num_classes, samples, &out.gradient);
  return out;
}

TrainResult train(const TrainingData& data, const ValidationData& validation,
                  std::size_t num_classes, const ClassifierWeights* warm_start,
                  const TrainConfig& config) {
  if (num_classes == 0) throw Error(ErrorKind::InvalidArgument, "classifier needs classes");
  if (validation.features.size() != validation.masks.size()) {
    throw Error(ErrorKind::ShapeMismatch, "validation feature and mask counts differ");
  }
  Samples samples = gather(data, num_classes);
  if (samples.size() == 0) throw Error(ErrorKind::NoLabels, "every training pixel is unlabeled");
  const Standardizer standardizer = Standardizer::fit(samples);
  standardizer.apply(samples);

  ClassifierWeights state = ClassifierWeights::zeros(num_classes);
  if (warm_start) {
    if (warm_start->num_classes != num_classes ||
        warm_start->weights.size() != num_classes * kParamDim) {
      throw Error(ErrorKind::ShapeMismatch, "warm-start weights do not match the class count");
    }
    state.weights = standardizer.to_standard(warm_start->weights, num_classes);
    state.shadow = state.weights;
  }

  TrainResult result;
  std::vector<double> grad;
  double loss = loss_and_gradient(state.weights, num_classes, samples, &grad);
  result.loss_history.push_back(loss);

  const bool early_stopping = !validation.features.empty();
  double best = -std::numeric_limits<double>::infinity();
  std::vector<double> best_weights = standardizer.to_raw(state.shadow, num_classes);
  int since_best = 0;
  double lr = config.learning_rate;
  int halvings = 0;

  std::vector<double> candidate(state.weights.size());
  std::vector<double> candidate_grad;
  for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
    double candidate_loss = 0.0;
    bool accepted = false;
    while (halvings <= config.max_halvings) {
      for (std::size_t i = 0; i < candidate.size(); ++i) {
        candidate[i] = state.weights[i] - lr * grad[i];
      }
      candidate_loss = loss_and_gradient(candidate, num_classes, samples, &candidate_grad);
      if (candidate_loss <= loss) {
        accepted = true;
        break;
      }
      lr *= 0.5;
      ++halvings;
    }
    if (!accepted) break;

    state.weights.swap(candidate);
    grad.swap(candidate_grad);
    loss = candidate_loss;
    result.loss_history.push_back(loss);
    for (std::size_t i = 0; i < state.shadow.size(); ++i) {
      state.shadow[i] = config.polyak * state.shadow[i] + (1.0 - config.polyak) * state.weights[i];
    }
    result.epochs = epoch;

    if (!early_stopping) continue;
    auto shadow_raw = standardizer.to_raw(state.shadow, num_classes);
    const double score = validation_miou(shadow_raw, num_classes, validation);
    if (score > best) {
      best = score;
      best_weights = std::move(shadow_raw);
      result.best_epoch = epoch;
      since_best = 0;
    } else if (epoch > config.warmup_epochs && ++since_best >= config.patience) {
      break;
    }
  }

  if (!early_stopping) {
    best_weights = standardizer.to_raw(state.shadow, num_classes);
    result.best_epoch = result.epochs;
    best = 0.0;
  } else if (result.epochs == 0) {
    best = validation_miou(best_weights, num_classes, validation);
  }
  result.best_validation_miou = best;
  result.model.num_classes = num_classes;
  result.model.weights = best_weights;
  result.model.shadow = std::move(best_weights);
  return result;
}

ProbabilityMap predict_proba(const ClassifierWeights& weights, const PixelFeatures& features) {
  const std::size_t classes = weights.num_classes;
  if (classes == 0 || weights.weights.size() != classes * kParamDim) {
    throw Error(ErrorKind::ShapeMismatch, "classifier weights are malformed");
  }
  std::vector<float> probs(features.pixel_count() * classes);
  std::vector<double> z(classes);
  for (std::size_t p = 0; p < features.pixel_count(); ++p) {
    const auto f = features.pixel(p);
    double top = -std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < classes; ++c) {
      const double* wc = weights.weights.data() + c * kParamDim;
      double v = wc[kFeatureDim];
      for (std::size_t d = 0; d < kFeatureDim; ++d) v += wc[d] * f[d];
      z[c] = v;
      top = std::max(top, v);
    }
    double norm = 0.0;
    for (std::size_t c = 0; c < classes; ++c) {
      z[c] = std::exp(z[c] - top);
      norm += z[c];
    }
    for (std::size_t c = 0; c < classes; ++c) {
      probs[p * classes + c] = static_cast<float>(z[c] / norm);
    }
  }
  return ProbabilityMap(features.height, features.width, classes, std::move(probs));
}

}  // namespace oreal
