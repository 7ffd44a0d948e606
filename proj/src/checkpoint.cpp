#include "dvit/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "dvit/errors.hpp"

namespace dvit {

namespace {

class Writer {
 public:
  void u16(std::uint16_t v) {
    bytes_.push_back(static_cast<std::uint8_t>(v & 0xff));
    bytes_.push_back(static_cast<std::uint8_t>(v >> 8));
  }
  void u32(std::uint32_t v) {
    for (int s = 0; s < 32; s += 8) bytes_.push_back(static_cast<std::uint8_t>((v >> s) & 0xff));
  }
  void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
  void raw(std::string_view s) { bytes_.insert(bytes_.end(), s.begin(), s.end()); }
  void str(std::string_view s) {
    u32(static_cast<std::uint32_t>(s.size()));
    raw(s);
  }
  std::vector<std::uint8_t> take() { return std::move(bytes_); }

 private:
  std::vector<std::uint8_t> bytes_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::uint16_t u16() {
    need(2);
    const std::uint16_t v = static_cast<std::uint16_t>(bytes_[pos_] | (bytes_[pos_ + 1] << 8));
    pos_ += 2;
    return v;
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes_[pos_ + i]) << (8 * i);
    pos_ += 4;
    return v;
  }
  float f32() { return std::bit_cast<float>(u32()); }
  std::string raw(std::size_t n) {
    need(n);
    std::string s(reinterpret_cast<const char*>(bytes_.data() + pos_), n);
    pos_ += n;
    return s;
  }
  std::string str() { return raw(u32()); }
  bool done() const { return pos_ == bytes_.size(); }

 private:
  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) throw FormatError("checkpoint: truncated file");
  }
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<std::uint8_t> encode_checkpoint(const VitModel& model) {
  Writer w;
  w.raw(std::string_view(kCheckpointMagic, 4));
  w.u16(kCheckpointVersion);
  w.str(format_key_values(model.config().to_key_values()));
  const auto params = model.named_parameters();
  w.u32(static_cast<std::uint32_t>(params.size()));
  for (const auto& [name, tensor] : params) {
    w.str(name);
    w.u32(static_cast<std::uint32_t>(tensor.rank()));
    for (std::size_t e : tensor.shape()) w.u32(static_cast<std::uint32_t>(e));
    for (double v : tensor.data()) w.f32(static_cast<float>(v));
  }
  return w.take();
}

VitModel decode_checkpoint(std::span<const std::uint8_t> bytes) {
  Reader r(bytes);
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kCheckpointMagic, 4) != 0)
    throw FormatError("checkpoint: bad magic bytes (expected \"VGVT\")");
  r.raw(4);
  const std::uint16_t version = r.u16();
  if (version != kCheckpointVersion)
    throw VersionError("checkpoint: unsupported format version " + std::to_string(version) +
                       " (this build reads version " + std::to_string(kCheckpointVersion) + ")");

  VitConfig config;
  try {
    config = VitConfig::from_key_values(parse_key_values(r.str()));
    config.validate();
  } catch (const ContractError& e) {
    throw IntegrityError(std::string("checkpoint: invalid config: ") + e.what());
  } catch (const ParseError& e) {
    throw FormatError(std::string("checkpoint: config block: ") + e.what());
  }

  VitModel model = VitModel::zeros(config);
  const auto expected = model.named_parameters();
  const std::uint32_t count = r.u32();
  if (count != expected.size())
    throw IntegrityError("checkpoint: " + std::to_string(count) + " tensors stored, config implies " +
                         std::to_string(expected.size()));
  for (const auto& [name, tensor] : expected) {
    const std::string stored = r.str();
    if (stored != name) throw IntegrityError("checkpoint: expected tensor '" + name + "', found '" + stored + "'");
    const std::uint32_t rank = r.u32();
    Shape shape(rank);
    for (auto& e : shape) e = r.u32();
    if (shape != tensor.shape())
      throw IntegrityError("checkpoint: tensor '" + name + "' has shape " + shape_str(shape) + ", config implies " +
                           shape_str(tensor.shape()));
    Tensor dst = tensor;
    for (double& v : dst.mutable_data()) v = static_cast<double>(r.f32());
  }
  if (!r.done()) throw IntegrityError("checkpoint: trailing bytes after tensor table");
  return model;
}

void save_checkpoint(const VitModel& model, const std::filesystem::path& path) {
  const auto bytes = encode_checkpoint(model);
  write_file_atomic(path, std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
}

VitModel load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_checkpoint(bytes);
}

}  // namespace dvit
