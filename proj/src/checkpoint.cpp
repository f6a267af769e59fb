#include "poserefine/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <set>

#include "poserefine/errors.hpp"

namespace poserefine {

namespace {

constexpr char kMagic[8] = {'P', 'R', 'T', 'E', 'N', 'S', 'R', '\n'};

void put_u32(std::ostream& os, uint32_t v) {
    const unsigned char b[4] = {
        static_cast<unsigned char>(v & 0xff),
        static_cast<unsigned char>((v >> 8) & 0xff),
        static_cast<unsigned char>((v >> 16) & 0xff),
        static_cast<unsigned char>((v >> 24) & 0xff)};
    os.write(reinterpret_cast<const char*>(b), 4);
}

uint32_t get_u32(std::istream& is, const std::string& what) {
    unsigned char b[4];
    if (!is.read(reinterpret_cast<char*>(b), 4)) {
        throw DataError("checkpoint: truncated while reading " + what);
    }
    return static_cast<uint32_t>(b[0]) | (static_cast<uint32_t>(b[1]) << 8) |
           (static_cast<uint32_t>(b[2]) << 16) |
           (static_cast<uint32_t>(b[3]) << 24);
}

void put_f32(std::ostream& os, const float* data, size_t n) {
    // Serialize each value explicitly as a little-endian bit pattern.
    std::vector<unsigned char> buf(n * 4);
    for (size_t i = 0; i < n; ++i) {
        uint32_t bits;
        std::memcpy(&bits, &data[i], 4);
        buf[i * 4 + 0] = static_cast<unsigned char>(bits & 0xff);
        buf[i * 4 + 1] = static_cast<unsigned char>((bits >> 8) & 0xff);
        buf[i * 4 + 2] = static_cast<unsigned char>((bits >> 16) & 0xff);
        buf[i * 4 + 3] = static_cast<unsigned char>((bits >> 24) & 0xff);
    }
    os.write(reinterpret_cast<const char*>(buf.data()),
             static_cast<std::streamsize>(buf.size()));
}

void get_f32(std::istream& is, float* data, size_t n) {
    std::vector<unsigned char> buf(n * 4);
    if (!is.read(reinterpret_cast<char*>(buf.data()),
                 static_cast<std::streamsize>(buf.size()))) {
        throw DataError("checkpoint: truncated while reading payload");
    }
    for (size_t i = 0; i < n; ++i) {
        const uint32_t bits = static_cast<uint32_t>(buf[i * 4 + 0]) |
                              (static_cast<uint32_t>(buf[i * 4 + 1]) << 8) |
                              (static_cast<uint32_t>(buf[i * 4 + 2]) << 16) |
                              (static_cast<uint32_t>(buf[i * 4 + 3]) << 24);
        std::memcpy(&data[i], &bits, 4);
    }
}

}  // namespace

void save_checkpoint(
    const std::string& path,
    const std::vector<std::pair<std::string, const Tensor*>>& entries) {
    std::set<std::string> seen;
    for (const auto& [name, t] : entries) {
        if (!seen.insert(name).second) {
            throw std::invalid_argument("checkpoint: duplicate entry '" +
                                        name + "'");
        }
        (void)t;
    }
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw DataError("checkpoint: cannot open '" + path + "' for write");
    os.write(kMagic, 8);
    put_u32(os, kCheckpointFormatVersion);
    put_u32(os, static_cast<uint32_t>(entries.size()));
    for (const auto& [name, t] : entries) {
        put_u32(os, static_cast<uint32_t>(name.size()));
        os.write(name.data(), static_cast<std::streamsize>(name.size()));
        put_u32(os, static_cast<uint32_t>(t->rank()));
        for (int64_t d : t->shape) put_u32(os, static_cast<uint32_t>(d));
        put_f32(os, t->v.data(), t->v.size());
    }
    if (!os) throw DataError("checkpoint: write to '" + path + "' failed");
}

std::vector<std::pair<std::string, Tensor>> load_checkpoint(
    const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw DataError("checkpoint: cannot open '" + path + "'");
    char magic[8];
    if (!is.read(magic, 8) || std::memcmp(magic, kMagic, 8) != 0) {
        throw DataError("checkpoint: '" + path + "' has wrong magic");
    }
    const uint32_t version = get_u32(is, "format version");
    if (version != kCheckpointFormatVersion) {
        throw DataError("checkpoint: unsupported format version " +
                        std::to_string(version));
    }
    const uint32_t count = get_u32(is, "entry count");
    std::vector<std::pair<std::string, Tensor>> out;
    out.reserve(count);
    for (uint32_t e = 0; e < count; ++e) {
        const uint32_t name_len = get_u32(is, "name length");
        std::string name(name_len, '\0');
        if (!is.read(name.data(), name_len)) {
            throw DataError("checkpoint: truncated entry name");
        }
        const uint32_t rank = get_u32(is, "rank of '" + name + "'");
        if (rank > 8) {
            throw DataError("checkpoint: implausible rank " +
                            std::to_string(rank) + " for '" + name + "'");
        }
        std::vector<int64_t> shape(rank);
        for (uint32_t d = 0; d < rank; ++d) {
            shape[d] = get_u32(is, "dims of '" + name + "'");
        }
        Tensor t(shape);
        get_f32(is, t.v.data(), t.v.size());
        out.emplace_back(name, std::move(t));
    }
    return out;
}

std::map<std::string, Tensor> load_checkpoint_map(const std::string& path) {
    std::map<std::string, Tensor> out;
    for (auto& [name, t] : load_checkpoint(path)) {
        out.emplace(std::move(name), std::move(t));
    }
    return out;
}

}  // namespace poserefine
