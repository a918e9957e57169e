#pragma once

// Shared helpers for the test binaries: a deterministic value fuzzer,
// independent size/run oracles to check the wire encoders against, and a
// byte-flipping TCP relay for in-transit corruption tests.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <optional>
#include <random>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include "pipegen/net.hpp"
#include "pipegen/value.hpp"
#include "pipegen/wire.hpp"

namespace support {

using namespace pipegen;

// Runs fn and reports which error code it raised, if any; lets tests assert
// on codes with a plain CHECK.
template <typename Fn>
std::optional<ErrorCode> error_code_of(Fn&& fn) {
  try {
    std::forward<Fn>(fn)();
  } catch (const Error& e) {
    return e.code();
  }
  return std::nullopt;
}

// --- deterministic fuzzing --------------------------------------------------

class Gen {
 public:
  explicit Gen(uint64_t seed) : rng_(seed) {}

  uint64_t u64() { return rng_(); }
  // Uniform over [0, bound).
  uint64_t below(uint64_t bound) { return rng_() % bound; }
  bool chance(double p) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng_) < p; }

  int32_t i32() {
    if (chance(0.2)) return static_cast<int32_t>(below(10)) - 5;
    return static_cast<int32_t>(u64());
  }

  int64_t i64() {
    if (chance(0.2)) return static_cast<int64_t>(below(10)) - 5;
    return static_cast<int64_t>(u64());
  }

  double f64() {
    switch (below(8)) {
      case 0:
        return 0.0;
      case 1:
        return -0.0;
      case 2:
        return static_cast<double>(i64());
      case 3:
        return std::numeric_limits<double>::infinity();
      case 4:
        return std::numeric_limits<double>::denorm_min();
      default:
        return std::normal_distribution<double>(0.0, 1e6)(rng_);
    }
  }

  std::string text(size_t max_len) {
    static constexpr char kAscii[] =
        " !\"#$%&'()*+,-./0123456789:;<=>?ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz";
    const size_t len = below(max_len + 1);
    std::string out;
    out.reserve(len + 2);
    for (size_t i = 0; i < len; ++i) {
      if (chance(0.05)) {
        out += "\xC3\xA9";  // a two-byte code point now and then
      } else {
        out += kAscii[below(sizeof(kAscii) - 1)];
      }
    }
    return out;
  }

  TypeCode type() {
    static constexpr TypeCode kTypes[] = {TypeCode::Int32, TypeCode::Int64, TypeCode::Float64,
                                          TypeCode::Bool, TypeCode::Text};
    return kTypes[below(5)];
  }

  Value value(TypeCode t) {
    switch (t) {
      case TypeCode::Int32:
        return i32();
      case TypeCode::Int64:
        return i64();
      case TypeCode::Float64:
        return f64();
      case TypeCode::Bool:
        return chance(0.5);
      case TypeCode::Text:
        return text(24);
    }
    return int32_t{0};
  }

  Schema schema(size_t max_cols) {
    const size_t count = 1 + below(max_cols);
    std::vector<Column> columns;
    for (size_t i = 0; i < count; ++i) {
      // Unique or empty names, as the schema invariants demand.
      std::string name = chance(0.3) ? std::string() : "c" + std::to_string(i);
      columns.push_back({std::move(name), type()});
    }
    return Schema(std::move(columns));
  }

  RecordBatch batch(const Schema& schema, size_t rows) {
    RecordBatch out{schema, {}};
    out.rows.reserve(rows);
    for (size_t r = 0; r < rows; ++r) {
      Row row;
      row.reserve(schema.column_count());
      for (const Column& column : schema.columns()) row.push_back(value(column.type));
      out.rows.push_back(std::move(row));
    }
    return out;
  }

 private:
  std::mt19937_64 rng_;
};

// --- independent size oracles -----------------------------------------------

inline size_t value_wire_size(const Value& v) {
  switch (type_of(v)) {
    case TypeCode::Int32:
      return 4;
    case TypeCode::Int64:
    case TypeCode::Float64:
      return 8;
    case TypeCode::Bool:
      return 1;
    case TypeCode::Text:
      return 4 + std::get<std::string>(v).size();
  }
  return 0;
}

// Expected encode_block_row output size, derived from the documented layout
// rather than from the encoder.
inline size_t row_payload_size(const RecordBatch& batch) {
  size_t size = 4;
  for (const Row& row : batch.rows) {
    for (const Value& v : row) size += value_wire_size(v);
  }
  return size;
}

// Expected encode_block_column output size for the pivoted form of batch.
inline size_t column_payload_size(const RecordBatch& batch) {
  size_t size = 4;
  const size_t rows = batch.rows.size();
  for (size_t c = 0; c < batch.schema.column_count(); ++c) {
    switch (batch.schema.column(c).type) {
      case TypeCode::Int32:
        size += rows * 4;
        break;
      case TypeCode::Int64:
      case TypeCode::Float64:
        size += rows * 8;
        break;
      case TypeCode::Bool:
        size += rows;
        break;
      case TypeCode::Text:
        size += 4 * (rows + 1);
        for (const Row& row : batch.rows) size += std::get<std::string>(row[c]).size();
        break;
    }
  }
  return size;
}

// Run count of a column under "identical adjacent values" — the quantity the
// run-length layout stores one entry per.
template <typename T>
size_t run_count(const std::vector<T>& values) {
  size_t runs = 0;
  for (size_t i = 0; i < values.size();) {
    size_t j = i + 1;
    while (j < values.size() && values[j] == values[i]) ++j;
    ++runs;
    i = j;
  }
  return runs;
}

// --- byte-flipping relay ------------------------------------------------------

// Accepts one connection, connects onward, and forwards the byte stream with
// the byte at flip_offset XORed. Covers "a byte changed in transit" without
// touching either endpoint.
class TamperRelay {
 public:
  TamperRelay(std::string upstream_host, uint16_t upstream_port, size_t flip_offset, uint8_t flip_mask = 0x01)
      : upstream_host_(std::move(upstream_host)),
        upstream_port_(upstream_port),
        flip_offset_(flip_offset),
        flip_mask_(flip_mask),
        listener_(net::Listener::bind_any(0)) {
    pump_ = std::jthread([this] { pump(); });
  }

  uint16_t port() const { return listener_.port(); }

 private:
  void pump() {
    try {
      net::Socket inbound = listener_.accept();
      net::Socket outbound = net::connect_to(upstream_host_, upstream_port_);
      std::vector<uint8_t> buffer(4096);
      size_t seen = 0;
      while (true) {
        const size_t got = inbound.read_some(buffer.data(), buffer.size());
        if (got == 0) break;
        if (flip_offset_ >= seen && flip_offset_ < seen + got) {
          buffer[flip_offset_ - seen] ^= flip_mask_;
        }
        seen += got;
        outbound.write_all(buffer.data(), got);
      }
    } catch (const Error&) {
      // A peer that aborts mid-stream is part of what tests provoke.
    }
  }

  std::string upstream_host_;
  uint16_t upstream_port_;
  size_t flip_offset_;
  uint8_t flip_mask_;
  net::Listener listener_;
  std::jthread pump_;
};

// --- scratch files -------------------------------------------------------------

// Self-cleaning temporary directory for file-target tests.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    path_ = std::filesystem::temp_directory_path() / (tag + "-" + std::to_string(::getpid()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }

  std::string file(const std::string& name) const { return (path_ / name).string(); }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace support
