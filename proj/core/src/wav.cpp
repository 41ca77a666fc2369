#include "nixforge/wav.hpp"

#include <cmath>
#include <cstdint>
#include <fstream>

#include "nixforge/error.hpp"

namespace nixforge {

namespace {

void put_u32(std::string& out, uint32_t v) {
    for (int i = 0; i < 4; ++i)
        out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_u16(std::string& out, uint16_t v) {
    out.push_back(static_cast<char>(v & 0xff));
    out.push_back(static_cast<char>((v >> 8) & 0xff));
}

void write_bytes(const std::string& path, const std::string& bytes) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw InputError("cannot open '" + path + "' for writing");
    f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!f.good()) throw InputError("write failed for '" + path + "'");
}

} // namespace

std::string wav_bytes(const float* samples, size_t count, int sample_rate) {
    uint32_t t = static_cast<uint32_t>(count);
    std::string out;
    out.reserve(44 + 2 * static_cast<size_t>(t));
    out.append("RIFF");
    put_u32(out, 36 + 2 * t);
    out.append("WAVE");
    out.append("fmt ");
    put_u32(out, 16);
    put_u16(out, 1); // PCM
    put_u16(out, 1); // mono
    put_u32(out, static_cast<uint32_t>(sample_rate));
    put_u32(out, static_cast<uint32_t>(sample_rate) * 2);
    put_u16(out, 2);  // block align
    put_u16(out, 16); // bits per sample
    out.append("data");
    put_u32(out, 2 * t);
    for (uint32_t i = 0; i < t; ++i) {
        double v = samples[i];
        if (v > 1.0) v = 1.0;
        if (v < -1.0) v = -1.0;
        int16_t s = static_cast<int16_t>(std::lround(v * 32767.0));
        put_u16(out, static_cast<uint16_t>(s));
    }
    return out;
}

std::string wav_bytes(const Tensor& wave, int sample_rate) {
    if (wave.rank() != 2 || wave.dim(0) != 1)
        throw ShapeError("wav_bytes: waveform shape " + wave.shape_str() +
                         " vs expected [1 x T]");
    return wav_bytes(wave.data(), wave.size(), sample_rate);
}

void write_wav(const std::string& path, const Tensor& wave, int sample_rate) {
    write_bytes(path, wav_bytes(wave, sample_rate));
}

void write_wav(const std::string& path, const float* samples, size_t count,
               int sample_rate) {
    write_bytes(path, wav_bytes(samples, count, sample_rate));
}

} // namespace nixforge
