#pragma once

#include <cstdint>
#include <ostream>
#include <span>
#include <string>

namespace fusedsp {

enum class AudioFormat { raw_f32, wav };

/// Little-endian IEEE float samples, no header.
void write_raw_f32(std::ostream& out, std::span<const float> samples);

/// Mono WAVE_FORMAT_IEEE_FLOAT, 32 bits per sample, with a fact chunk.
void write_wav_f32(std::ostream& out, std::span<const float> samples, std::uint32_t sample_rate);

void write_audio(std::ostream& out, std::span<const float> samples, AudioFormat format,
                 std::uint32_t sample_rate);

/// Throws std::runtime_error if the file cannot be created or written.
void write_audio_file(const std::string& path, std::span<const float> samples, AudioFormat format,
                      std::uint32_t sample_rate);

}  // namespace fusedsp
