#include "isomt/checkpoint.hpp"

#include <cstdint>
#include <fstream>
#include <vector>

namespace isomt::model {
namespace {

constexpr char kMagic[] = "ISOMTCK1\n";
constexpr size_t kMagicLen = sizeof(kMagic) - 1;

void put_u64(std::ostream& out, uint64_t v) {
  char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.write(b, 8);
}

uint64_t get_u64(std::istream& in) {
  char b[8];
  in.read(b, 8);
  require(in.good(), "checkpoint truncated");
  uint64_t v = 0;
  for (int i = 0; i < 8; ++i)
    v |= static_cast<uint64_t>(static_cast<unsigned char>(b[i])) << (8 * i);
  return v;
}

}  // namespace

void save_checkpoint(const std::string& path, const Transformer& m) {
  std::ofstream out(path, std::ios::binary);
  require(out.good(), "cannot open ", path, " for writing");
  out.write(kMagic, static_cast<std::streamsize>(kMagicLen));
  std::string cfg = m.config().to_json().dump();
  put_u64(out, cfg.size());
  out.write(cfg.data(), static_cast<std::streamsize>(cfg.size()));
  put_u64(out, m.params().count());
  std::vector<double> buf;
  for (const auto& p : m.params().items()) {
    put_u64(out, p->name.size());
    out.write(p->name.data(), static_cast<std::streamsize>(p->name.size()));
    put_u64(out, static_cast<uint64_t>(p->value.rows()));
    put_u64(out, static_cast<uint64_t>(p->value.cols()));
    buf.clear();
    buf.reserve(static_cast<size_t>(p->value.size()));
    for (Eigen::Index r = 0; r < p->value.rows(); ++r)
      for (Eigen::Index c = 0; c < p->value.cols(); ++c) buf.push_back(p->value(r, c));
    out.write(reinterpret_cast<const char*>(buf.data()),
              static_cast<std::streamsize>(buf.size() * sizeof(double)));
  }
  require(out.good(), "write to ", path, " failed");
}

Transformer load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), "cannot open ", path);
  char magic[kMagicLen];
  in.read(magic, static_cast<std::streamsize>(kMagicLen));
  require(in.good() && std::string(magic, kMagicLen) == kMagic,
          path, " is not a model checkpoint");
  uint64_t cfg_len = get_u64(in);
  std::string cfg_text(cfg_len, '\0');
  in.read(cfg_text.data(), static_cast<std::streamsize>(cfg_len));
  require(in.good(), "checkpoint truncated in config");
  Config cfg;
  try {
    cfg = Config::from_json(nlohmann::json::parse(cfg_text));
  } catch (const nlohmann::json::exception& e) {
    fail("checkpoint config is not valid JSON: ", e.what());
  }

  Transformer m(cfg);
  uint64_t n = get_u64(in);
  require(n == m.params().count(), "checkpoint holds ", n, " tensors, model expects ",
          m.params().count());
  std::vector<double> buf;
  for (const auto& p : m.params().items()) {
    uint64_t name_len = get_u64(in);
    std::string name(name_len, '\0');
    in.read(name.data(), static_cast<std::streamsize>(name_len));
    require(in.good() && name == p->name, "checkpoint tensor order mismatch at ", p->name);
    auto rows = static_cast<Eigen::Index>(get_u64(in));
    auto cols = static_cast<Eigen::Index>(get_u64(in));
    require(rows == p->value.rows() && cols == p->value.cols(),
            "checkpoint shape mismatch at ", p->name);
    buf.resize(static_cast<size_t>(rows) * static_cast<size_t>(cols));
    in.read(reinterpret_cast<char*>(buf.data()),
            static_cast<std::streamsize>(buf.size() * sizeof(double)));
    require(in.good(), "checkpoint truncated in ", p->name);
    size_t k = 0;
    for (Eigen::Index r = 0; r < rows; ++r)
      for (Eigen::Index c = 0; c < cols; ++c) p->value(r, c) = buf[k++];
  }
  return m;
}

}  // namespace isomt::model
