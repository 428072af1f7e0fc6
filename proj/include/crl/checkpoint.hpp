#pragma once

// Checkpoint container: magic + version, a JSON header describing the
// architecture, config hash and seed, then flat little-endian float32 arrays
// per network in declaration order. Loading validates the architecture.

#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace crl {

struct Checkpoint {
  nlohmann::json header;
  std::vector<std::vector<float>> blobs;

  static constexpr char kMagic[4] = {'C', 'R', 'L', 'C'};
  static constexpr std::uint32_t kVersion = 1;

  void save(const std::string& path) const {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open '" + path + "' for writing");
    os.write(kMagic, 4);
    write_u32(os, kVersion);
    const std::string h = header.dump();
    write_u32(os, static_cast<std::uint32_t>(h.size()));
    os.write(h.data(), h.size());
    write_u32(os, static_cast<std::uint32_t>(blobs.size()));
    for (const auto& blob : blobs) {
      write_u32(os, static_cast<std::uint32_t>(blob.size()));
      os.write(reinterpret_cast<const char*>(blob.data()),
               static_cast<std::streamsize>(blob.size() * sizeof(float)));
    }
    if (!os) throw std::runtime_error("checkpoint write failed: " + path);
  }

  static Checkpoint load(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open '" + path + "'");
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, kMagic, 4) != 0)
      throw std::runtime_error("not a checkpoint file: " + path);
    if (read_u32(is) != kVersion)
      throw std::runtime_error("unsupported checkpoint version: " + path);
    Checkpoint ck;
    const std::uint32_t hlen = read_u32(is);
    std::string h(hlen, '\0');
    is.read(h.data(), hlen);
    ck.header = nlohmann::json::parse(h);
    const std::uint32_t n = read_u32(is);
    ck.blobs.resize(n);
    for (auto& blob : ck.blobs) {
      blob.resize(read_u32(is));
      is.read(reinterpret_cast<char*>(blob.data()),
              static_cast<std::streamsize>(blob.size() * sizeof(float)));
    }
    if (!is) throw std::runtime_error("truncated checkpoint: " + path);
    return ck;
  }

 private:
  static void write_u32(std::ostream& os, std::uint32_t v) {
    char buf[4] = {static_cast<char>(v), static_cast<char>(v >> 8),
                   static_cast<char>(v >> 16), static_cast<char>(v >> 24)};
    os.write(buf, 4);
  }
  static std::uint32_t read_u32(std::istream& is) {
    unsigned char buf[4];
    is.read(reinterpret_cast<char*>(buf), 4);
    return static_cast<std::uint32_t>(buf[0]) |
           (static_cast<std::uint32_t>(buf[1]) << 8) |
           (static_cast<std::uint32_t>(buf[2]) << 16) |
           (static_cast<std::uint32_t>(buf[3]) << 24);
  }
};

}  // namespace crl
