#include "floodbed/wire.hpp"

#include <bit>
#include <cstring>

namespace floodbed::wire {
namespace {

template <typename T>
void store_le(std::span<std::uint8_t> out, std::size_t offset, T value) {
  static_assert(std::endian::native == std::endian::little, "big-endian hosts need byte swapping");
  std::memcpy(out.data() + offset, &value, sizeof(T));
}

template <typename T>
T load_le(std::span<const std::uint8_t> in, std::size_t offset) {
  T value;
  std::memcpy(&value, in.data() + offset, sizeof(T));
  return value;
}

}  // namespace

void put_header(std::span<std::uint8_t> out, std::uint8_t kind, const Header& h) {
  out[0] = kMagic0;
  out[1] = kMagic1;
  out[2] = kVersion;
  out[kKindOffset] = kind;
  store_le<std::uint32_t>(out, 4, h.device_id);
  store_le<std::uint32_t>(out, 8, h.seq);
  store_le<std::uint64_t>(out, 12, static_cast<std::uint64_t>(h.emit_time.count()));
}

std::vector<std::uint8_t> encode_telemetry(const Header& h, float temperature_c) {
  std::vector<std::uint8_t> out(kTelemetrySize);
  put_header(out, 0, h);
  store_le<float>(out, kHeaderSize, temperature_c);
  return out;
}

std::vector<std::uint8_t> encode_flood(const Header& h, std::size_t datagram_size, Rng& rng) {
  if (datagram_size < kHeaderSize) throw ContractViolation("flood datagram smaller than header");
  std::vector<std::uint8_t> out(datagram_size);
  put_header(out, 1, h);
  std::size_t i = kHeaderSize;
  while (i < datagram_size) {
    std::uint64_t bits = rng.next_u64();
    for (int b = 0; b < 8 && i < datagram_size; ++b, ++i) {
      out[i] = static_cast<std::uint8_t>(bits >> (8 * b));
    }
  }
  return out;
}

std::optional<Header> decode_header(std::span<const std::uint8_t> datagram) {
  if (datagram.size() < kHeaderSize) return std::nullopt;
  if (datagram[0] != kMagic0 || datagram[1] != kMagic1 || datagram[2] != kVersion) return std::nullopt;
  Header h;
  h.device_id = load_le<std::uint32_t>(datagram, 4);
  h.seq = load_le<std::uint32_t>(datagram, 8);
  h.emit_time = SimTime{static_cast<std::int64_t>(load_le<std::uint64_t>(datagram, 12))};
  return h;
}

std::optional<float> decode_temperature(std::span<const std::uint8_t> datagram) {
  if (datagram.size() < kTelemetrySize) return std::nullopt;
  return load_le<float>(datagram, kHeaderSize);
}

std::uint8_t debug_kind(std::span<const std::uint8_t> datagram) {
  if (datagram.size() <= kKindOffset) throw ContractViolation("datagram too short for kind byte");
  return datagram[kKindOffset];
}

}  // namespace floodbed::wire
