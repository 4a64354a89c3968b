#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "oreal/core.hpp"
#include "oreal/model.hpp"
#include "oreal/superpixel.hpp"

// Flat little-endian binary containers. Every file starts with a 4-byte magic
// and three u32 fields, followed by a row-major payload:
//
//   ORPM  height, width, num_classes   f32[H*W*C]   probability map
//   ORLM  height, width, num_classes   i32[H*W]     label map, -1 = unlabeled
//   ORIM  height, width, channels(3)   f32[H*W*3]   RGB image
//   ORSP  height, width, K             i32[H*W]     superpixel assignment
//   ORWT  num_classes, dim, 2          f64[C*dim] weights, then f64[C*dim] shadow

namespace oreal::io {

std::vector<char> encode(const ProbabilityMap& pm);
std::vector<char> encode(const LabelMap& map, std::size_t num_classes);
std::vector<char> encode(const Image& image);
std::vector<char> encode(const SuperpixelPartition& partition);
std::vector<char> encode(const ClassifierWeights& weights);

ProbabilityMap decode_probability_map(const std::vector<char>& bytes);
LabelMap decode_label_map(const std::vector<char>& bytes);
Image decode_image(const std::vector<char>& bytes);
SuperpixelPartition decode_partition(const std::vector<char>& bytes);
ClassifierWeights decode_weights(const std::vector<char>& bytes);

/// Whole-file helpers; failures throw Error(Io) naming the path.
std::vector<char> read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::vector<char>& bytes);
void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

}  // namespace oreal::io
