#include "fusedsp/audio_io.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <vector>

namespace fusedsp {

namespace {

void put_u16(std::ostream& out, std::uint16_t v) {
  const char b[2] = {static_cast<char>(v & 0xff), static_cast<char>(v >> 8)};
  out.write(b, 2);
}

void put_u32(std::ostream& out, std::uint32_t v) {
  const char b[4] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
                     static_cast<char>((v >> 16) & 0xff), static_cast<char>(v >> 24)};
  out.write(b, 4);
}

}  // namespace

void write_raw_f32(std::ostream& out, std::span<const float> samples) {
  if constexpr (std::endian::native == std::endian::little) {
    out.write(reinterpret_cast<const char*>(samples.data()),
              static_cast<std::streamsize>(samples.size_bytes()));
  } else {
    for (float s : samples) put_u32(out, std::bit_cast<std::uint32_t>(s));
  }
}

void write_wav_f32(std::ostream& out, std::span<const float> samples, std::uint32_t sample_rate) {
  constexpr std::uint16_t format_ieee_float = 3;
  constexpr std::uint16_t channels = 1;
  constexpr std::uint16_t bits = 32;
  constexpr std::uint16_t block_align = channels * bits / 8;
  const std::uint64_t data_bytes = static_cast<std::uint64_t>(samples.size()) * block_align;
  // RIFF size: "WAVE" + fmt(8+18) + fact(8+4) + data(8+n)
  const std::uint64_t riff_size = 4 + 26 + 12 + 8 + data_bytes;
  if (riff_size > std::numeric_limits<std::uint32_t>::max()) {
    throw std::runtime_error("wav: " + std::to_string(samples.size()) + " samples exceed the 4 GiB RIFF limit");
  }

  out.write("RIFF", 4);
  put_u32(out, static_cast<std::uint32_t>(riff_size));
  out.write("WAVE", 4);

  out.write("fmt ", 4);
  put_u32(out, 18);
  put_u16(out, format_ieee_float);
  put_u16(out, channels);
  put_u32(out, sample_rate);
  put_u32(out, sample_rate * block_align);
  put_u16(out, block_align);
  put_u16(out, bits);
  put_u16(out, 0);  // cbSize

  out.write("fact", 4);
  put_u32(out, 4);
  put_u32(out, static_cast<std::uint32_t>(samples.size()));

  out.write("data", 4);
  put_u32(out, static_cast<std::uint32_t>(data_bytes));
  write_raw_f32(out, samples);
}

void write_audio(std::ostream& out, std::span<const float> samples, AudioFormat format,
                 std::uint32_t sample_rate) {
  if (format == AudioFormat::wav) {
    write_wav_f32(out, samples, sample_rate);
  } else {
    write_raw_f32(out, samples);
  }
}

void write_audio_file(const std::string& path, std::span<const float> samples, AudioFormat format,
                      std::uint32_t sample_rate) {
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw std::runtime_error("cannot open '" + path + "' for writing");
  write_audio(file, samples, format, sample_rate);
  file.flush();
  if (!file) throw std::runtime_error("error while writing '" + path + "'");
}

}  // namespace fusedsp
