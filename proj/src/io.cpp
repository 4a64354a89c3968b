#include "oreal/io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

namespace oreal::io {

namespace {

class Writer {
 public:
  Writer(const char (&magic)[5], std::uint32_t a, std::uint32_t b, std::uint32_t c) {
    bytes_.insert(bytes_.end(), magic, magic + 4);
    u32(a);
    u32(b);
    u32(c);
  }

  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) bytes_.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) bytes_.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
  }
  void i32(std::int32_t v) { u32(static_cast<std::uint32_t>(v)); }
  void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }

  std::vector<char> take() { return std::move(bytes_); }

 private:
  std::vector<char> bytes_;
};

class Reader {
 public:
  Reader(const std::vector<char>& bytes, const char* magic) : bytes_(bytes) {
    if (bytes_.size() < 16 || std::memcmp(bytes_.data(), magic, 4) != 0) {
      throw Error(ErrorKind::Format, std::string("missing '") + magic + "' container header");
    }
    pos_ = 4;
  }

  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) {
      v |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
    }
    pos_ += 4;
    return v;
  }
  std::uint64_t u64() {
    const std::uint64_t lo = u32();
    const std::uint64_t hi = u32();
    return lo | (hi << 32);
  }
  std::int32_t i32() { return static_cast<std::int32_t>(u32()); }
  float f32() { return std::bit_cast<float>(u32()); }
  double f64() { return std::bit_cast<double>(u64()); }

  void expect_payload(std::size_t bytes) const {
    if (bytes_.size() - pos_ != bytes) {
      std::ostringstream msg;
      msg << "container payload is " << bytes_.size() - pos_ << " bytes, expected " << bytes;
      throw Error(ErrorKind::Format, msg.str());
    }
  }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > bytes_.size()) throw Error(ErrorKind::Format, "truncated container");
  }

  const std::vector<char>& bytes_;
  std::size_t pos_ = 0;
};

std::uint32_t narrow(std::size_t v) {
  if (v > 0xFFFFFFFFu) throw Error(ErrorKind::Format, "dimension does not fit in u32");
  return static_cast<std::uint32_t>(v);
}

}  // namespace

std::vector<char> encode(const ProbabilityMap& pm) {
  Writer w("ORPM", narrow(pm.height()), narrow(pm.width()), narrow(pm.num_classes()));
  for (const float v : pm.data()) w.f32(v);
  return w.take();
}

std::vector<char> encode(const LabelMap& map, std::size_t num_classes) {
  Writer w("ORLM", narrow(map.height), narrow(map.width), narrow(num_classes));
  for (const ClassId v : map.labels) w.i32(v);
  return w.take();
}

std::vector<char> encode(const Image& image) {
  Writer w("ORIM", narrow(image.height), narrow(image.width), 3);
  for (const float v : image.rgb) w.f32(v);
  return w.take();
}

std::vector<char> encode(const SuperpixelPartition& partition) {
  Writer w("ORSP", narrow(partition.height()), narrow(partition.width()),
           narrow(partition.count()));
  for (const auto id : partition.assignment()) w.i32(id);
  return w.take();
}

std::vector<char> encode(const ClassifierWeights& weights) {
  Writer w("ORWT", narrow(weights.num_classes), narrow(kParamDim), 2);
  for (const double v : weights.weights) w.f64(v);
  for (const double v : weights.shadow) w.f64(v);
  return w.take();
}

ProbabilityMap decode_probability_map(const std::vector<char>& bytes) {
  Reader r(bytes, "ORPM");
  const std::size_t h = r.u32(), w = r.u32(), c = r.u32();
  r.expect_payload(h * w * c * 4);
  std::vector<float> probs(h * w * c);
  for (auto& v : probs) v = r.f32();
  return ProbabilityMap(h, w, c, std::move(probs));
}

LabelMap decode_label_map(const std::vector<char>& bytes) {
  Reader r(bytes, "ORLM");
  const std::size_t h = r.u32(), w = r.u32();
  r.u32();
  r.expect_payload(h * w * 4);
  LabelMap map(h, w, 0);
  for (auto& v : map.labels) v = r.i32();
  return map;
}

Image decode_image(const std::vector<char>& bytes) {
  Reader r(bytes, "ORIM");
  const std::size_t h = r.u32(), w = r.u32(), ch = r.u32();
  if (ch != 3) throw Error(ErrorKind::Format, "only 3-channel images are supported");
  r.expect_payload(h * w * 3 * 4);
  Image image(h, w);
  for (auto& v : image.rgb) v = r.f32();
  return image;
}

SuperpixelPartition decode_partition(const std::vector<char>& bytes) {
  Reader r(bytes, "ORSP");
  const std::size_t h = r.u32(), w = r.u32(), k = r.u32();
  r.expect_payload(h * w * 4);
  std::vector<std::int32_t> assignment(h * w);
  for (auto& v : assignment) v = r.i32();
  auto partition = SuperpixelPartition::from_assignment(h, w, std::move(assignment));
  if (partition.count() != k) throw Error(ErrorKind::Format, "superpixel count mismatch");
  return partition;
}

ClassifierWeights decode_weights(const std::vector<char>& bytes) {
  Reader r(bytes, "ORWT");
  const std::size_t c = r.u32(), dim = r.u32(), copies = r.u32();
  if (dim != kParamDim || copies != 2) {
    throw Error(ErrorKind::Format, "unexpected weight checkpoint layout");
  }
  r.expect_payload(2 * c * dim * 8);
  ClassifierWeights weights = ClassifierWeights::zeros(c);
  for (auto& v : weights.weights) v = r.f64();
  for (auto& v : weights.shadow) v = r.f64();
  return weights;
}

std::vector<char> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string() + " for reading");
  return std::vector<char>(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_file(const std::filesystem::path& path, const std::vector<char>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::Io, "cannot open " + path.string() + " for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorKind::Io, "failed writing " + path.string());
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  write_file(path, std::vector<char>(text.begin(), text.end()));
}

std::string read_text(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  return std::string(bytes.begin(), bytes.end());
}

}  // namespace oreal::io
