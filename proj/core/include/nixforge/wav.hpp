#pragma once

#include <cstddef>
#include <string>

#include "nixforge/tensor.hpp"

namespace nixforge {

// PCM 16-bit mono RIFF/WAVE. Samples are clamped to [-1, 1] and scaled by
// 32767. File size is exactly 44 + 2T bytes; T = 0 writes the bare header.
std::string wav_bytes(const float* samples, size_t count, int sample_rate = 22050);
std::string wav_bytes(const Tensor& wave, int sample_rate = 22050);

void write_wav(const std::string& path, const Tensor& wave,
               int sample_rate = 22050);
void write_wav(const std::string& path, const float* samples, size_t count,
               int sample_rate = 22050);

} // namespace nixforge
