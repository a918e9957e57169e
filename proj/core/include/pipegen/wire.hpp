#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "pipegen/value.hpp"

namespace pipegen::wire {

inline constexpr char kMagic[4] = {'P', 'G', 'E', 'N'};
inline constexpr uint16_t kVersion = 1;

enum class FormatCode : uint8_t { Row = 0, Column = 1 };
enum class CompressionCode : uint8_t { None = 0, Rle = 1, Deflate = 2 };

enum class FrameType : uint8_t {
  Data = 0,
  KeyHeader = 1,
  KeyExtend = 2,
  VerbatimRow = 3,
  BitmapRow = 4,
  EndOfStream = 5,
};

struct TransferHeader {
  FormatCode format = FormatCode::Row;
  CompressionCode compression = CompressionCode::None;
  std::string query_id;
  Schema schema;

  bool operator==(const TransferHeader&) const = default;
};

struct Frame {
  FrameType type = FrameType::Data;
  std::vector<uint8_t> payload;

  bool operator==(const Frame&) const = default;
};

// Column-major form of a RecordBatch. Bool columns are stored as bytes.
using ColumnArray = std::variant<std::vector<int32_t>, std::vector<int64_t>, std::vector<double>,
                                 std::vector<uint8_t>, std::vector<std::string>>;

struct ColumnBlock {
  Schema schema;
  size_t row_count = 0;
  std::vector<ColumnArray> columns;

  bool operator==(const ColumnBlock& other) const;
};

void validate_block(const ColumnBlock& block);

// --- handshake header ------------------------------------------------------

std::vector<uint8_t> encode_header(const TransferHeader& header);

struct DecodedHeader {
  TransferHeader header;
  size_t consumed = 0;
};

DecodedHeader decode_header(std::span<const uint8_t> bytes);

// --- block payloads --------------------------------------------------------

std::vector<uint8_t> encode_block_row(const RecordBatch& batch);
RecordBatch decode_block_row(std::span<const uint8_t> bytes, const Schema& schema);

std::vector<uint8_t> encode_block_column(const ColumnBlock& block);
ColumnBlock decode_block_column(std::span<const uint8_t> bytes, const Schema& schema);

ColumnBlock pivot(const RecordBatch& batch);
RecordBatch unpivot(const ColumnBlock& block);

// --- payload compression ---------------------------------------------------

// RLE is value-level over column payloads and therefore requires
// FormatCode::Column; Deflate is a raw RFC 1951 stream over the whole payload.
std::vector<uint8_t> compress(std::span<const uint8_t> payload, CompressionCode codec, const Schema& schema,
                              FormatCode format);
std::vector<uint8_t> decompress(std::span<const uint8_t> payload, CompressionCode codec, const Schema& schema,
                                FormatCode format);

// --- frame envelope: type u8, payload length u32 LE, payload ---------------

inline constexpr size_t kFrameEnvelopeSize = 5;
inline constexpr size_t kMaxFramePayload = 1u << 30;

std::vector<uint8_t> encode_frame(const Frame& frame);

// Envelope alone, for senders that put the payload on the wire separately
// instead of concatenating it into one buffer.
std::array<uint8_t, kFrameEnvelopeSize> frame_envelope(FrameType type, size_t payload_size);

// --- little-endian scalar helpers ------------------------------------------

void put_u16(std::vector<uint8_t>& out, uint16_t v);
void put_u32(std::vector<uint8_t>& out, uint32_t v);
void put_u64(std::vector<uint8_t>& out, uint64_t v);

// Sequential reader over a byte span; throws TruncatedInput past the end.
class ByteReader {
 public:
  explicit ByteReader(std::span<const uint8_t> bytes) : bytes_(bytes) {}

  uint8_t u8();
  uint16_t u16();
  uint32_t u32();
  uint64_t u64();
  std::span<const uint8_t> take(size_t n);
  std::string_view text(size_t n);

  size_t consumed() const { return pos_; }
  size_t remaining() const { return bytes_.size() - pos_; }
  bool done() const { return pos_ == bytes_.size(); }

 private:
  std::span<const uint8_t> bytes_;
  size_t pos_ = 0;
};

}  // namespace pipegen::wire
