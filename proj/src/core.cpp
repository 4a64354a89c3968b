#include "oreal/core.hpp"

#include <cmath>
#include <sstream>

namespace oreal {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::ShapeMismatch: return "ShapeMismatch";
    case ErrorKind::NotNormalized: return "NotNormalized";
    case ErrorKind::NegativeEntry: return "NegativeEntry";
    case ErrorKind::InfeasibleGrid: return "InfeasibleGrid";
    case ErrorKind::EmptySuperpixel: return "EmptySuperpixel";
    case ErrorKind::BudgetExceedsPool: return "BudgetExceedsPool";
    case ErrorKind::NoLabels: return "NoLabels";
    case ErrorKind::DegenerateCurve: return "DegenerateCurve";
    case ErrorKind::Io: return "Io";
    case ErrorKind::Format: return "Format";
  }
  return "Unknown";
}

PartialLabelMap make_unlabeled_map(std::size_t height, std::size_t width) {
  return PartialLabelMap(height, width, kUnlabeled);
}

void require_ground_truth(const LabelMap& mask, std::size_t num_classes) {
  if (mask.labels.size() != mask.pixel_count()) {
    throw Error(ErrorKind::ShapeMismatch, "label map payload does not match its shape");
  }
  for (std::size_t i = 0; i < mask.labels.size(); ++i) {
    const ClassId label = mask.labels[i];
    if (label < 0 || static_cast<std::size_t>(label) >= num_classes) {
      std::ostringstream msg;
      msg << "ground-truth label " << label << " at pixel " << i << " outside [0, "
          << num_classes << ")";
      throw Error(ErrorKind::InvalidArgument, msg.str());
    }
  }
}

ProbabilityMap::ProbabilityMap(std::size_t height, std::size_t width, std::size_t num_classes,
                               std::vector<float> probs)
    : height_(height), width_(width), num_classes_(num_classes), probs_(std::move(probs)) {
  if (num_classes_ == 0) {
    throw Error(ErrorKind::InvalidArgument, "probability map needs at least one class");
  }
  if (probs_.size() != height_ * width_ * num_classes_) {
    throw Error(ErrorKind::ShapeMismatch, "probability payload does not match height*width*C");
  }
}

std::optional<ProbabilityMapIssue> validate_probability_map(const ProbabilityMap& pm) {
  const std::size_t classes = pm.num_classes();
  for (std::size_t i = 0; i < pm.pixel_count(); ++i) {
    const auto row = pm.pixel(i);
    double sum = 0.0;
    for (std::size_t c = 0; c < classes; ++c) {
      if (!(row[c] >= 0.0f)) {
        return ProbabilityMapIssue{ProbabilityMapIssue::Kind::NegativeEntry, i, c, 0.0};
      }
      sum += static_cast<double>(row[c]);
    }
    if (std::abs(sum - 1.0) > kProbabilityTolerance) {
      return ProbabilityMapIssue{ProbabilityMapIssue::Kind::NotNormalized, i, 0, sum};
    }
  }
  return std::nullopt;
}

void require_valid(const ProbabilityMap& pm) {
  const auto issue = validate_probability_map(pm);
  if (!issue) return;
  std::ostringstream msg;
  if (issue->kind == ProbabilityMapIssue::Kind::NegativeEntry) {
    msg << "negative probability at pixel " << issue->pixel << ", class " << issue->class_index;
    throw Error(ErrorKind::NegativeEntry, msg.str());
  }
  msg << "probabilities at pixel " << issue->pixel << " sum to " << issue->sum;
  throw Error(ErrorKind::NotNormalized, msg.str());
}

std::size_t argmax(std::span<const float> values) {
  std::size_t best = 0;
  for (std::size_t c = 1; c < values.size(); ++c) {
    if (values[c] > values[best]) best = c;
  }
  return best;
}

LabelMap predicted_label_map(const ProbabilityMap& pm) {
  LabelMap out(pm.height(), pm.width(), 0);
  for (std::size_t i = 0; i < pm.pixel_count(); ++i) {
    out.labels[i] = static_cast<ClassId>(argmax(pm.pixel(i)));
  }
  return out;
}

}  // namespace oreal
