// Datagram layout (little-endian):
//
//   offset  size  field
//   0       2     magic 0x46 0x42 ("FB")
//   2       1     version (1)
//   3       1     kind (0 telemetry, 1 flood) -- offline debugging only
//   4       4     device_id
//   8       4     seq
//   12      8     emit_time_micros
//   20      ...   telemetry: f32 temperature; flood: pseudorandom padding
//
// The server path decodes through decode_header(), which never touches the
// kind byte. Only debug_kind() reads it.
#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "floodbed/common.hpp"

namespace floodbed::wire {

inline constexpr std::uint8_t kMagic0 = 0x46;
inline constexpr std::uint8_t kMagic1 = 0x42;
inline constexpr std::uint8_t kVersion = 1;
inline constexpr std::size_t kHeaderSize = 20;
inline constexpr std::size_t kKindOffset = 3;
inline constexpr std::size_t kTelemetrySize = kHeaderSize + 4;

struct Header {
  std::uint32_t device_id = 0;
  std::uint32_t seq = 0;
  SimTime emit_time{0};

  friend bool operator==(const Header&, const Header&) = default;
};

void put_header(std::span<std::uint8_t> out, std::uint8_t kind, const Header& h);
std::vector<std::uint8_t> encode_telemetry(const Header& h, float temperature_c);

// Header plus padding_size - kHeaderSize bytes from the caller's generator.
std::vector<std::uint8_t> encode_flood(const Header& h, std::size_t datagram_size, Rng& rng);

// nullopt when the datagram is shorter than a header or the magic/version
// do not match.
std::optional<Header> decode_header(std::span<const std::uint8_t> datagram);

std::optional<float> decode_temperature(std::span<const std::uint8_t> datagram);

std::uint8_t debug_kind(std::span<const std::uint8_t> datagram);

}  // namespace floodbed::wire
