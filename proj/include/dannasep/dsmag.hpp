#pragma once

#include "dannasep/tensor.hpp"

#include <filesystem>

namespace dannasep {

// DSMAG1 magnitude tensor file: the ASCII bytes "DSMAG1", then channels,
// frames and bins as little-endian u32, then channels*frames*bins
// little-endian float32 values, bins fastest.

inline constexpr char kDsmagMagic[6] = {'D', 'S', 'M', 'A', 'G', '1'};

RealTensor read_dsmag(const std::filesystem::path& path);
void write_dsmag(const RealTensor& mags, const std::filesystem::path& path);

}  // namespace dannasep
