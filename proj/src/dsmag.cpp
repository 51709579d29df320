#include "dannasep/dsmag.hpp"

#include "dannasep/audio_io.hpp"
#include "dannasep/error.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>
#include <string>
#include <vector>

namespace dannasep {

namespace {

constexpr std::size_t kHeaderBytes = sizeof(kDsmagMagic) + 3 * 4;

std::uint32_t le32(const unsigned char* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

void put32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

}  // namespace

RealTensor read_dsmag(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::IoFailure, "cannot open '" + path.string() + "'");
    const std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (bytes.size() < kHeaderBytes || std::memcmp(bytes.data(), kDsmagMagic, sizeof(kDsmagMagic)) != 0) {
        fail(ErrorCode::MalformedHeader, "'" + path.string() + "' is not a DSMAG1 file");
    }
    const Shape3 shape{le32(bytes.data() + 6), le32(bytes.data() + 10), le32(bytes.data() + 14)};
    const std::size_t expected = kHeaderBytes + shape.size() * 4;
    if (bytes.size() < expected) {
        fail(ErrorCode::TruncatedData, "'" + path.string() + "' declares " + std::to_string(shape.size()) +
                                           " values but holds " + std::to_string((bytes.size() - kHeaderBytes) / 4));
    }
    RealTensor out(shape);
    auto data = out.data();
    for (std::size_t i = 0; i < data.size(); ++i) {
        const double v = std::bit_cast<float>(le32(bytes.data() + kHeaderBytes + 4 * i));
        if (!std::isfinite(v) || v < 0.0) {
            fail(ErrorCode::InvalidArgument, "'" + path.string() + "' holds a negative or non-finite magnitude");
        }
        data[i] = v;
    }
    return out;
}

void write_dsmag(const RealTensor& mags, const std::filesystem::path& path) {
    constexpr auto max_dim = std::numeric_limits<std::uint32_t>::max();
    if (mags.channels() > max_dim || mags.frames() > max_dim || mags.bins() > max_dim) {
        fail(ErrorCode::InvalidArgument, "tensor dimensions exceed the DSMAG1 header range");
    }
    std::string out(kDsmagMagic, sizeof(kDsmagMagic));
    out.reserve(kHeaderBytes + 4 * mags.size());
    put32(out, static_cast<std::uint32_t>(mags.channels()));
    put32(out, static_cast<std::uint32_t>(mags.frames()));
    put32(out, static_cast<std::uint32_t>(mags.bins()));
    for (double v : mags.data()) put32(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
    write_file_atomic(path, out);
}

}  // namespace dannasep
