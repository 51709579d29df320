#pragma once

#include "dannasep/waveform.hpp"

#include <filesystem>
#include <string_view>

namespace dannasep {

enum class WavEncoding { pcm16, float32 };

/// Reads a RIFF/WAVE file (PCM16, PCM24, or IEEE float32, plain or
/// WAVE_FORMAT_EXTENSIBLE). Integer PCM is scaled by 2^-(bits-1).
/// Chunks other than fmt and data are skipped.
Waveform read_wav(const std::filesystem::path& path);

/// Writes `w` atomically (temporary file + rename). PCM16 rounds to nearest
/// and clamps to [-1, 1 - 2^-15].
void write_wav(const Waveform& w, const std::filesystem::path& path,
               WavEncoding encoding = WavEncoding::float32);

WavEncoding parse_wav_encoding(std::string_view name);

/// Writes `bytes` to `path` via a sibling temporary file and rename.
void write_file_atomic(const std::filesystem::path& path, std::string_view bytes);

}  // namespace dannasep
