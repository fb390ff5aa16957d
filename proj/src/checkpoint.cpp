#include "lasrl/checkpoint.hpp"

#include <bit>
#include <fstream>
#include <iterator>

#include "lasrl/digest.hpp"
#include "lasrl/errors.hpp"

namespace lasrl {

namespace {

constexpr char kMagic[8] = {'L', 'A', 'S', 'R', 'L', 'C', 'K', 'P'};

void put_u64(std::string& out, std::uint64_t v, int bytes = 8) {
  for (int i = 0; i < bytes; ++i) {
    out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
  }
}

void put_string(std::string& out, const std::string& s) {
  put_u64(out, s.size(), 4);
  out += s;
}

class Reader {
 public:
  explicit Reader(const std::string& bytes) : bytes_(bytes) {}

  std::uint64_t uint(int n) {
    need(n);
    std::uint64_t v = 0;
    for (int i = 0; i < n; ++i) {
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
    }
    pos_ += n;
    return v;
  }

  std::string string() {
    const auto n = uint(4);
    need(n);
    std::string s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }

  bool done() const { return pos_ == bytes_.size(); }
  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  void need(std::uint64_t n) const {
    if (pos_ + n > bytes_.size()) {
      throw ParseError("checkpoint truncated at byte " + std::to_string(pos_));
    }
  }

  const std::string& bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string encode_checkpoint(const std::string& config_json, std::span<const ParamGroup> groups) {
  std::string out(kMagic, sizeof(kMagic));
  put_u64(out, kCheckpointVersion, 4);
  put_string(out, config_json);
  put_string(out, sha256_hex(config_json));
  put_u64(out, groups.size(), 4);
  for (const auto& g : groups) {
    put_string(out, g.name);
    put_u64(out, g.value.rows());
    put_u64(out, g.value.cols());
    out.push_back(g.frozen ? 1 : 0);
    for (double v : g.value.values()) {
      put_u64(out, std::bit_cast<std::uint64_t>(v));
    }
  }
  return out;
}

Checkpoint decode_checkpoint(const std::string& bytes) {
  if (bytes.size() < sizeof(kMagic) || bytes.compare(0, sizeof(kMagic), kMagic, sizeof(kMagic)) != 0) {
    throw ParseError("not a checkpoint file (bad magic)");
  }
  const std::string body = bytes.substr(sizeof(kMagic));
  Reader r(body);
  const auto version = r.uint(4);
  if (version != kCheckpointVersion) {
    throw ParseError("unsupported checkpoint version " + std::to_string(version));
  }
  Checkpoint ck;
  ck.config_json = r.string();
  const std::string digest = r.string();
  if (digest != sha256_hex(ck.config_json)) {
    throw ParseError("checkpoint config digest mismatch");
  }
  const auto count = r.uint(4);
  for (std::uint64_t i = 0; i < count; ++i) {
    std::string name = r.string();
    const auto rows = r.uint(8);
    const auto cols = r.uint(8);
    const bool frozen = r.uint(1) != 0;
    // Checked before allocating, so a corrupt shape cannot request memory.
    if (cols != 0 && rows > r.remaining() / 8 / cols) {
      throw ParseError("checkpoint group '" + name + "' claims more values than the file holds");
    }
    std::vector<double> data(rows * cols);
    for (double& v : data) {
      v = std::bit_cast<double>(r.uint(8));
    }
    ck.groups.emplace_back(std::move(name), Matrix(rows, cols, std::move(data)), frozen);
  }
  if (!r.done()) {
    throw ParseError("trailing bytes after checkpoint payload");
  }
  return ck;
}

void write_checkpoint(const std::filesystem::path& path, const std::string& config_json,
                      std::span<const ParamGroup> groups) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw Error("cannot write checkpoint " + path.string());
  }
  const std::string bytes = encode_checkpoint(config_json, groups);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

Checkpoint read_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error("cannot open checkpoint " + path.string());
  }
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_checkpoint(bytes);
}

}  // namespace lasrl
