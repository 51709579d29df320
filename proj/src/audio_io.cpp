#include "dannasep/audio_io.hpp"

#include "dannasep/error.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>
#include <system_error>
#include <vector>

namespace dannasep {

namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

std::uint16_t le16(const unsigned char* p) { return static_cast<std::uint16_t>(p[0] | (p[1] << 8)); }

std::uint32_t le32(const unsigned char* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

void put16(std::string& out, std::uint16_t v) {
    out.push_back(static_cast<char>(v & 0xFF));
    out.push_back(static_cast<char>(v >> 8));
}

void put32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

struct FormatChunk {
    std::uint16_t format = 0;
    std::uint16_t channels = 0;
    std::uint32_t sample_rate = 0;
    std::uint16_t bits = 0;
};

std::string describe(const std::filesystem::path& path) { return "'" + path.string() + "'"; }

}  // namespace

Waveform read_wav(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::IoFailure, "cannot open " + describe(path));
    const std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

    if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
        std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
        fail(ErrorCode::MalformedHeader, describe(path) + " is not a RIFF/WAVE file");
    }

    FormatChunk fmt;
    bool have_fmt = false;
    const unsigned char* data = nullptr;
    std::size_t data_size = 0;

    std::size_t pos = 12;
    while (pos + 8 <= bytes.size()) {
        const unsigned char* id = bytes.data() + pos;
        const std::size_t size = le32(bytes.data() + pos + 4);
        const std::size_t body = pos + 8;
        if (std::memcmp(id, "fmt ", 4) == 0) {
            if (size < 16 || body + size > bytes.size()) {
                fail(ErrorCode::MalformedHeader, describe(path) + " has a short fmt chunk");
            }
            const unsigned char* p = bytes.data() + body;
            fmt.format = le16(p);
            fmt.channels = le16(p + 2);
            fmt.sample_rate = le32(p + 4);
            fmt.bits = le16(p + 14);
            if (fmt.format == kFormatExtensible) {
                if (size < 40) fail(ErrorCode::MalformedHeader, describe(path) + " has a short extensible fmt chunk");
                // The first two bytes of the sub-format GUID carry the format tag.
                fmt.format = le16(p + 24);
            }
            have_fmt = true;
        } else if (std::memcmp(id, "data", 4) == 0) {
            if (!have_fmt) fail(ErrorCode::MalformedHeader, describe(path) + " has data before fmt");
            if (body + size > bytes.size()) {
                fail(ErrorCode::TruncatedData, describe(path) + " declares " + std::to_string(size) +
                                                   " data bytes but only " + std::to_string(bytes.size() - body) +
                                                   " are present");
            }
            data = bytes.data() + body;
            data_size = size;
            break;
        }
        pos = body + size + (size & 1);
    }

    if (!have_fmt) fail(ErrorCode::MalformedHeader, describe(path) + " has no fmt chunk");
    if (data == nullptr) fail(ErrorCode::MalformedHeader, describe(path) + " has no data chunk");
    if (fmt.channels == 0 || fmt.sample_rate == 0) {
        fail(ErrorCode::MalformedHeader, describe(path) + " declares zero channels or sample rate");
    }

    const bool pcm = fmt.format == kFormatPcm && (fmt.bits == 16 || fmt.bits == 24);
    const bool flt = fmt.format == kFormatFloat && fmt.bits == 32;
    if (!pcm && !flt) {
        fail(ErrorCode::UnsupportedEncoding, describe(path) + " uses format tag " + std::to_string(fmt.format) +
                                                 " with " + std::to_string(fmt.bits) + " bits");
    }

    const std::size_t bytes_per_sample = fmt.bits / 8;
    const std::size_t frame_bytes = bytes_per_sample * fmt.channels;
    const std::size_t frames = data_size / frame_bytes;
    Waveform w(fmt.channels, frames, static_cast<int>(fmt.sample_rate));

    const double scale = pcm ? 1.0 / static_cast<double>(1u << (fmt.bits - 1)) : 1.0;
    for (std::size_t i = 0; i < frames; ++i) {
        for (std::size_t c = 0; c < fmt.channels; ++c) {
            const unsigned char* p = data + i * frame_bytes + c * bytes_per_sample;
            double value = 0.0;
            if (flt) {
                value = static_cast<double>(std::bit_cast<float>(le32(p)));
            } else if (fmt.bits == 16) {
                value = static_cast<double>(static_cast<std::int16_t>(le16(p))) * scale;
            } else {
                std::int32_t v = static_cast<std::int32_t>(p[0] | (p[1] << 8) | (p[2] << 16));
                if (v & 0x800000) v -= 0x1000000;
                value = static_cast<double>(v) * scale;
            }
            w.at(c, i) = value;
        }
    }
    return w;
}

void write_wav(const Waveform& w, const std::filesystem::path& path, WavEncoding encoding) {
    w.check_finite();
    const std::uint16_t bits = encoding == WavEncoding::pcm16 ? 16 : 32;
    const std::uint16_t format = encoding == WavEncoding::pcm16 ? kFormatPcm : kFormatFloat;
    const auto channels = static_cast<std::uint16_t>(w.channels());
    const std::uint32_t block_align = channels * (bits / 8);
    const std::uint64_t data_bytes = static_cast<std::uint64_t>(block_align) * w.length();
    if (data_bytes > 0xFFFFFFFFull - 36) fail(ErrorCode::IoFailure, "waveform too large for a WAV file");

    std::string out;
    out.reserve(44 + data_bytes);
    out.append("RIFF");
    put32(out, static_cast<std::uint32_t>(36 + data_bytes));
    out.append("WAVEfmt ");
    put32(out, 16);
    put16(out, format);
    put16(out, channels);
    put32(out, static_cast<std::uint32_t>(w.sample_rate()));
    put32(out, static_cast<std::uint32_t>(w.sample_rate()) * block_align);
    put16(out, static_cast<std::uint16_t>(block_align));
    put16(out, bits);
    out.append("data");
    put32(out, static_cast<std::uint32_t>(data_bytes));

    for (std::size_t i = 0; i < w.length(); ++i) {
        for (std::size_t c = 0; c < w.channels(); ++c) {
            const double x = w.at(c, i);
            if (encoding == WavEncoding::float32) {
                put32(out, std::bit_cast<std::uint32_t>(static_cast<float>(x)));
            } else {
                const double scaled = std::nearbyint(x * 32768.0);
                const double clamped = std::min(32767.0, std::max(-32768.0, scaled));
                put16(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(clamped)));
            }
        }
    }
    write_file_atomic(path, out);
}

WavEncoding parse_wav_encoding(std::string_view name) {
    if (name == "pcm16") return WavEncoding::pcm16;
    if (name == "float32") return WavEncoding::float32;
    fail(ErrorCode::InvalidArgument, "unknown WAV encoding '" + std::string(name) + "'");
}

void write_file_atomic(const std::filesystem::path& path, std::string_view bytes) {
    static std::atomic<unsigned> counter{0};
    std::filesystem::path tmp = path;
    tmp += ".tmp" + std::to_string(counter.fetch_add(1));
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) fail(ErrorCode::IoFailure, "cannot open " + describe(tmp) + " for writing");
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        if (!out) fail(ErrorCode::IoFailure, "write to " + describe(tmp) + " failed");
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        fail(ErrorCode::IoFailure, "cannot move output into place at " + describe(path));
    }
}

}  // namespace dannasep
