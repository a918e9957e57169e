#include "pipegen/wire.hpp"

#include <zlib.h>

#include <bit>
#include <cstring>

namespace pipegen::wire {

namespace {

void put_bytes(std::vector<uint8_t>& out, const void* data, size_t n) {
  const auto* p = static_cast<const uint8_t*>(data);
  out.insert(out.end(), p, p + n);
}

void check_text_length(size_t n, const char* what) {
  if (n > 0xFFFF) {
    raise(ErrorCode::FieldTooLong, std::string(what) + " is " + std::to_string(n) + " bytes, limit 65535");
  }
}

void put_prefixed_text(std::vector<uint8_t>& out, std::string_view text, const char* what) {
  check_text_length(text.size(), what);
  put_u16(out, static_cast<uint16_t>(text.size()));
  put_bytes(out, text.data(), text.size());
}

TypeCode read_type_code(ByteReader& reader) {
  const auto raw = reader.u8();
  if (raw < 1 || raw > 5) {
    raise(ErrorCode::UnknownTypeCode, "type code " + std::to_string(raw));
  }
  return static_cast<TypeCode>(raw);
}

void put_value(std::vector<uint8_t>& out, const Value& value) {
  switch (type_of(value)) {
    case TypeCode::Int32:
      put_u32(out, static_cast<uint32_t>(std::get<int32_t>(value)));
      break;
    case TypeCode::Int64:
      put_u64(out, static_cast<uint64_t>(std::get<int64_t>(value)));
      break;
    case TypeCode::Float64:
      put_u64(out, std::bit_cast<uint64_t>(std::get<double>(value)));
      break;
    case TypeCode::Bool:
      out.push_back(std::get<bool>(value) ? 1 : 0);
      break;
    case TypeCode::Text: {
      const auto& text = std::get<std::string>(value);
      if (text.size() > 0xFFFFFFFFull) raise(ErrorCode::FieldTooLong, "text value exceeds u32 length");
      put_u32(out, static_cast<uint32_t>(text.size()));
      put_bytes(out, text.data(), text.size());
      break;
    }
  }
}

Value read_value(ByteReader& reader, TypeCode type) {
  switch (type) {
    case TypeCode::Int32:
      return static_cast<int32_t>(reader.u32());
    case TypeCode::Int64:
      return static_cast<int64_t>(reader.u64());
    case TypeCode::Float64:
      return std::bit_cast<double>(reader.u64());
    case TypeCode::Bool: {
      const auto b = reader.u8();
      if (b > 1) raise(ErrorCode::CorruptPayload, "bool byte " + std::to_string(b));
      return b == 1;
    }
    case TypeCode::Text: {
      const auto n = reader.u32();
      return std::string(reader.text(n));
    }
  }
  raise(ErrorCode::UnknownTypeCode, "type code " + std::to_string(static_cast<int>(type)));
}

}  // namespace

void put_u16(std::vector<uint8_t>& out, uint16_t v) {
  out.push_back(static_cast<uint8_t>(v));
  out.push_back(static_cast<uint8_t>(v >> 8));
}

void put_u32(std::vector<uint8_t>& out, uint32_t v) {
  for (int shift = 0; shift < 32; shift += 8) out.push_back(static_cast<uint8_t>(v >> shift));
}

void put_u64(std::vector<uint8_t>& out, uint64_t v) {
  for (int shift = 0; shift < 64; shift += 8) out.push_back(static_cast<uint8_t>(v >> shift));
}

uint8_t ByteReader::u8() {
  if (pos_ + 1 > bytes_.size()) raise(ErrorCode::TruncatedInput, "need 1 byte at offset " + std::to_string(pos_));
  return bytes_[pos_++];
}

uint16_t ByteReader::u16() {
  if (pos_ + 2 > bytes_.size()) raise(ErrorCode::TruncatedInput, "need 2 bytes at offset " + std::to_string(pos_));
  uint16_t v = static_cast<uint16_t>(bytes_[pos_]) | static_cast<uint16_t>(bytes_[pos_ + 1]) << 8;
  pos_ += 2;
  return v;
}

uint32_t ByteReader::u32() {
  if (pos_ + 4 > bytes_.size()) raise(ErrorCode::TruncatedInput, "need 4 bytes at offset " + std::to_string(pos_));
  uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(bytes_[pos_ + i]) << (8 * i);
  pos_ += 4;
  return v;
}

uint64_t ByteReader::u64() {
  if (pos_ + 8 > bytes_.size()) raise(ErrorCode::TruncatedInput, "need 8 bytes at offset " + std::to_string(pos_));
  uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(bytes_[pos_ + i]) << (8 * i);
  pos_ += 8;
  return v;
}

std::span<const uint8_t> ByteReader::take(size_t n) {
  if (pos_ + n > bytes_.size()) {
    raise(ErrorCode::TruncatedInput,
          "need " + std::to_string(n) + " bytes at offset " + std::to_string(pos_) + ", have " +
              std::to_string(bytes_.size() - pos_));
  }
  auto view = bytes_.subspan(pos_, n);
  pos_ += n;
  return view;
}

std::string_view ByteReader::text(size_t n) {
  auto view = take(n);
  return {reinterpret_cast<const char*>(view.data()), view.size()};
}

// --- header -----------------------------------------------------------------

std::vector<uint8_t> encode_header(const TransferHeader& header) {
  validate_schema(header.schema);
  std::vector<uint8_t> out;
  out.reserve(12 + header.query_id.size() + header.schema.column_count() * 8);
  put_bytes(out, kMagic, 4);
  put_u16(out, kVersion);
  out.push_back(static_cast<uint8_t>(header.format));
  out.push_back(static_cast<uint8_t>(header.compression));
  put_prefixed_text(out, header.query_id, "query id");
  put_u16(out, static_cast<uint16_t>(header.schema.column_count()));
  for (const auto& col : header.schema.columns()) {
    out.push_back(static_cast<uint8_t>(col.type));
    put_prefixed_text(out, col.name, "column name");
  }
  return out;
}

DecodedHeader decode_header(std::span<const uint8_t> bytes) {
  ByteReader reader(bytes);
  char magic[4];
  auto view = reader.take(4);
  std::memcpy(magic, view.data(), 4);
  if (std::memcmp(magic, kMagic, 4) != 0) {
    raise(ErrorCode::BadMagic, "expected PGEN");
  }
  const auto version = reader.u16();
  if (version != kVersion) {
    raise(ErrorCode::UnsupportedVersion, "version " + std::to_string(version));
  }
  const auto format_raw = reader.u8();
  if (format_raw > 1) raise(ErrorCode::UnknownFormatCode, "format code " + std::to_string(format_raw));
  const auto compression_raw = reader.u8();
  if (compression_raw > 2) {
    raise(ErrorCode::UnknownCompressionCode, "compression code " + std::to_string(compression_raw));
  }
  TransferHeader header;
  header.format = static_cast<FormatCode>(format_raw);
  header.compression = static_cast<CompressionCode>(compression_raw);
  header.query_id = std::string(reader.text(reader.u16()));
  const auto column_count = reader.u16();
  std::vector<Column> columns;
  columns.reserve(column_count);
  for (uint16_t i = 0; i < column_count; ++i) {
    Column col;
    col.type = read_type_code(reader);
    col.name = std::string(reader.text(reader.u16()));
    columns.push_back(std::move(col));
  }
  header.schema = Schema(std::move(columns));
  validate_schema(header.schema);
  return {std::move(header), reader.consumed()};
}

// --- row blocks --------------------------------------------------------------

std::vector<uint8_t> encode_block_row(const RecordBatch& batch) {
  validate_batch(batch);
  std::vector<uint8_t> out;
  put_u32(out, static_cast<uint32_t>(batch.rows.size()));
  for (const auto& row : batch.rows) {
    for (const auto& value : row) put_value(out, value);
  }
  return out;
}

RecordBatch decode_block_row(std::span<const uint8_t> bytes, const Schema& schema) {
  ByteReader reader(bytes);
  const auto row_count = reader.u32();
  RecordBatch batch;
  batch.schema = schema;
  batch.rows.reserve(row_count);
  for (uint32_t r = 0; r < row_count; ++r) {
    Row row;
    row.reserve(schema.column_count());
    for (const auto& col : schema.columns()) row.push_back(read_value(reader, col.type));
    batch.rows.push_back(std::move(row));
  }
  if (!reader.done()) {
    raise(ErrorCode::CorruptPayload, std::to_string(reader.remaining()) + " trailing bytes after row block");
  }
  return batch;
}

// --- column blocks -----------------------------------------------------------

bool ColumnBlock::operator==(const ColumnBlock& other) const {
  if (schema != other.schema || row_count != other.row_count || columns.size() != other.columns.size()) return false;
  for (size_t c = 0; c < columns.size(); ++c) {
    if (columns[c].index() != other.columns[c].index()) return false;
    if (std::holds_alternative<std::vector<double>>(columns[c])) {
      const auto& a = std::get<std::vector<double>>(columns[c]);
      const auto& b = std::get<std::vector<double>>(other.columns[c]);
      if (a.size() != b.size()) return false;
      if (std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) != 0) return false;
    } else if (columns[c] != other.columns[c]) {
      return false;
    }
  }
  return true;
}

void validate_block(const ColumnBlock& block) {
  validate_schema(block.schema);
  if (block.columns.size() != block.schema.column_count()) {
    raise(ErrorCode::TypeMismatch, "block has " + std::to_string(block.columns.size()) + " columns, schema has " +
                                       std::to_string(block.schema.column_count()));
  }
  for (size_t c = 0; c < block.columns.size(); ++c) {
    const auto expected = block.schema.column(c).type;
    const auto actual = static_cast<TypeCode>(block.columns[c].index() + 1);
    if (actual != expected) {
      raise(ErrorCode::TypeMismatch, "column " + std::to_string(c) + " array is " + type_code_name(actual) +
                                         ", schema says " + type_code_name(expected));
    }
    const auto rows =
        std::visit([](const auto& values) { return values.size(); }, block.columns[c]);
    if (rows != block.row_count) {
      raise(ErrorCode::TypeMismatch, "column " + std::to_string(c) + " has " + std::to_string(rows) +
                                         " values, block row count is " + std::to_string(block.row_count));
    }
  }
}

std::vector<uint8_t> encode_block_column(const ColumnBlock& block) {
  validate_block(block);
  std::vector<uint8_t> out;
  put_u32(out, static_cast<uint32_t>(block.row_count));
  for (const auto& column : block.columns) {
    std::visit(
        [&out](const auto& values) {
          using V = std::decay_t<decltype(values)>;
          if constexpr (std::is_same_v<V, std::vector<std::string>>) {
            uint64_t total = 0;
            for (const auto& s : values) total += s.size();
            if (total > 0xFFFFFFFFull) {
              raise(ErrorCode::FieldTooLong, "text column exceeds 4 GiB per block");
            }
            uint32_t offset = 0;
            put_u32(out, 0);
            for (const auto& s : values) {
              offset += static_cast<uint32_t>(s.size());
              put_u32(out, offset);
            }
            for (const auto& s : values) put_bytes(out, s.data(), s.size());
          } else if constexpr (std::is_same_v<V, std::vector<uint8_t>>) {
            for (auto b : values) {
              if (b > 1) raise(ErrorCode::TypeMismatch, "bool column byte " + std::to_string(b));
              out.push_back(b);
            }
          } else {
            // fixed-width values are already little-endian in memory
            static_assert(std::endian::native == std::endian::little);
            put_bytes(out, values.data(), values.size() * sizeof(typename V::value_type));
          }
        },
        column);
  }
  return out;
}

ColumnBlock decode_block_column(std::span<const uint8_t> bytes, const Schema& schema) {
  ByteReader reader(bytes);
  const auto row_count = reader.u32();
  ColumnBlock block;
  block.schema = schema;
  block.row_count = row_count;
  block.columns.reserve(schema.column_count());
  for (const auto& col : schema.columns()) {
    switch (col.type) {
      case TypeCode::Int32: {
        std::vector<int32_t> values(row_count);
        auto view = reader.take(row_count * 4ull);
        std::memcpy(values.data(), view.data(), view.size());
        block.columns.emplace_back(std::move(values));
        break;
      }
      case TypeCode::Int64: {
        std::vector<int64_t> values(row_count);
        auto view = reader.take(row_count * 8ull);
        std::memcpy(values.data(), view.data(), view.size());
        block.columns.emplace_back(std::move(values));
        break;
      }
      case TypeCode::Float64: {
        std::vector<double> values(row_count);
        auto view = reader.take(row_count * 8ull);
        std::memcpy(values.data(), view.data(), view.size());
        block.columns.emplace_back(std::move(values));
        break;
      }
      case TypeCode::Bool: {
        std::vector<uint8_t> values;
        values.reserve(row_count);
        auto view = reader.take(row_count);
        for (auto b : view) {
          if (b > 1) raise(ErrorCode::CorruptPayload, "bool byte " + std::to_string(b));
          values.push_back(b);
        }
        block.columns.emplace_back(std::move(values));
        break;
      }
      case TypeCode::Text: {
        std::vector<uint32_t> offsets(static_cast<size_t>(row_count) + 1);
        auto view = reader.take(offsets.size() * 4ull);
        std::memcpy(offsets.data(), view.data(), view.size());
        if (offsets.front() != 0) raise(ErrorCode::CorruptPayload, "first text offset is not zero");
        for (size_t i = 1; i < offsets.size(); ++i) {
          if (offsets[i] < offsets[i - 1]) raise(ErrorCode::CorruptPayload, "text offsets decrease");
        }
        auto chars = reader.text(offsets.back());
        std::vector<std::string> values;
        values.reserve(row_count);
        for (uint32_t r = 0; r < row_count; ++r) {
          values.emplace_back(chars.substr(offsets[r], offsets[r + 1] - offsets[r]));
        }
        block.columns.emplace_back(std::move(values));
        break;
      }
    }
  }
  if (!reader.done()) {
    raise(ErrorCode::CorruptPayload, std::to_string(reader.remaining()) + " trailing bytes after column block");
  }
  return block;
}

// --- pivot -------------------------------------------------------------------

ColumnBlock pivot(const RecordBatch& batch) {
  validate_batch(batch);
  ColumnBlock block;
  block.schema = batch.schema;
  block.row_count = batch.rows.size();
  block.columns.reserve(batch.schema.column_count());
  for (size_t c = 0; c < batch.schema.column_count(); ++c) {
    switch (batch.schema.column(c).type) {
      case TypeCode::Int32: {
        std::vector<int32_t> values;
        values.reserve(block.row_count);
        for (const auto& row : batch.rows) values.push_back(std::get<int32_t>(row[c]));
        block.columns.emplace_back(std::move(values));
        break;
      }
      case TypeCode::Int64: {
        std::vector<int64_t> values;
        values.reserve(block.row_count);
        for (const auto& row : batch.rows) values.push_back(std::get<int64_t>(row[c]));
        block.columns.emplace_back(std::move(values));
        break;
      }
      case TypeCode::Float64: {
        std::vector<double> values;
        values.reserve(block.row_count);
        for (const auto& row : batch.rows) values.push_back(std::get<double>(row[c]));
        block.columns.emplace_back(std::move(values));
        break;
      }
      case TypeCode::Bool: {
        std::vector<uint8_t> values;
        values.reserve(block.row_count);
        for (const auto& row : batch.rows) values.push_back(std::get<bool>(row[c]) ? 1 : 0);
        block.columns.emplace_back(std::move(values));
        break;
      }
      case TypeCode::Text: {
        std::vector<std::string> values;
        values.reserve(block.row_count);
        for (const auto& row : batch.rows) values.push_back(std::get<std::string>(row[c]));
        block.columns.emplace_back(std::move(values));
        break;
      }
    }
  }
  return block;
}

RecordBatch unpivot(const ColumnBlock& block) {
  validate_block(block);
  RecordBatch batch;
  batch.schema = block.schema;
  batch.rows.resize(block.row_count);
  for (auto& row : batch.rows) row.reserve(block.schema.column_count());
  for (const auto& column : block.columns) {
    std::visit(
        [&batch](const auto& values) {
          using V = std::decay_t<decltype(values)>;
          for (size_t r = 0; r < values.size(); ++r) {
            if constexpr (std::is_same_v<V, std::vector<uint8_t>>) {
              batch.rows[r].emplace_back(values[r] == 1);
            } else {
              batch.rows[r].emplace_back(values[r]);
            }
          }
        },
        column);
  }
  return batch;
}

// --- compression -------------------------------------------------------------

namespace {

std::vector<uint8_t> deflate_bytes(std::span<const uint8_t> payload) {
  z_stream zs{};
  // raw deflate stream, no zlib wrapper
  if (deflateInit2(&zs, Z_DEFAULT_COMPRESSION, Z_DEFLATED, -15, 8, Z_DEFAULT_STRATEGY) != Z_OK) {
    raise(ErrorCode::IoError, "deflateInit failed");
  }
  std::vector<uint8_t> out(deflateBound(&zs, static_cast<uLong>(payload.size())));
  zs.next_in = const_cast<Bytef*>(payload.data());
  zs.avail_in = static_cast<uInt>(payload.size());
  zs.next_out = out.data();
  zs.avail_out = static_cast<uInt>(out.size());
  const int rc = deflate(&zs, Z_FINISH);
  deflateEnd(&zs);
  if (rc != Z_STREAM_END) raise(ErrorCode::IoError, "deflate failed rc=" + std::to_string(rc));
  out.resize(out.size() - zs.avail_out);
  return out;
}

std::vector<uint8_t> inflate_bytes(std::span<const uint8_t> payload) {
  z_stream zs{};
  if (inflateInit2(&zs, -15) != Z_OK) raise(ErrorCode::IoError, "inflateInit failed");
  std::vector<uint8_t> out;
  out.resize(std::max<size_t>(payload.size() * 4, 4096));
  zs.next_in = const_cast<Bytef*>(payload.data());
  zs.avail_in = static_cast<uInt>(payload.size());
  size_t written = 0;
  for (;;) {
    zs.next_out = out.data() + written;
    zs.avail_out = static_cast<uInt>(out.size() - written);
    const int rc = inflate(&zs, Z_NO_FLUSH);
    written = out.size() - zs.avail_out;
    if (rc == Z_STREAM_END) break;
    if (rc == Z_OK || rc == Z_BUF_ERROR) {
      if (zs.avail_out == 0) {
        out.resize(out.size() * 2);
        continue;
      }
      if (rc == Z_BUF_ERROR || zs.avail_in == 0) {
        inflateEnd(&zs);
        raise(ErrorCode::CorruptPayload, "deflate stream ended prematurely");
      }
      continue;
    }
    inflateEnd(&zs);
    raise(ErrorCode::CorruptPayload, "inflate failed rc=" + std::to_string(rc));
  }
  inflateEnd(&zs);
  out.resize(written);
  return out;
}

template <typename T>
void rle_encode_fixed(std::vector<uint8_t>& out, const std::vector<T>& values) {
  size_t i = 0;
  while (i < values.size()) {
    size_t j = i + 1;
    while (j < values.size() && !std::memcmp(&values[j], &values[i], sizeof(T))) ++j;
    put_u32(out, static_cast<uint32_t>(j - i));
    const auto* p = reinterpret_cast<const uint8_t*>(&values[i]);
    out.insert(out.end(), p, p + sizeof(T));
    i = j;
  }
}

}  // namespace

std::vector<uint8_t> compress(std::span<const uint8_t> payload, CompressionCode codec, const Schema& schema,
                              FormatCode format) {
  switch (codec) {
    case CompressionCode::None:
      return {payload.begin(), payload.end()};
    case CompressionCode::Deflate:
      return deflate_bytes(payload);
    case CompressionCode::Rle:
      break;
    default:
      raise(ErrorCode::UnknownCompressionCode, "compression code " + std::to_string(static_cast<int>(codec)));
  }
  if (format != FormatCode::Column) {
    raise(ErrorCode::RleRequiresColumn, "value-level runs need the column layout");
  }
  // Re-encode the column payload with each value array replaced by
  // (run length u32, value) pairs over maximal runs.
  const auto block = decode_block_column(payload, schema);
  std::vector<uint8_t> out;
  put_u32(out, static_cast<uint32_t>(block.row_count));
  for (const auto& column : block.columns) {
    std::visit(
        [&out](const auto& values) {
          using V = std::decay_t<decltype(values)>;
          if constexpr (std::is_same_v<V, std::vector<std::string>>) {
            size_t i = 0;
            while (i < values.size()) {
              size_t j = i + 1;
              while (j < values.size() && values[j] == values[i]) ++j;
              put_u32(out, static_cast<uint32_t>(j - i));
              put_u32(out, static_cast<uint32_t>(values[i].size()));
              out.insert(out.end(), values[i].begin(), values[i].end());
              i = j;
            }
          } else if constexpr (std::is_same_v<V, std::vector<uint8_t>>) {
            size_t i = 0;
            while (i < values.size()) {
              size_t j = i + 1;
              while (j < values.size() && values[j] == values[i]) ++j;
              put_u32(out, static_cast<uint32_t>(j - i));
              out.push_back(values[i]);
              i = j;
            }
          } else {
            rle_encode_fixed(out, values);
          }
        },
        column);
  }
  return out;
}

std::vector<uint8_t> decompress(std::span<const uint8_t> payload, CompressionCode codec, const Schema& schema,
                                FormatCode format) {
  switch (codec) {
    case CompressionCode::None:
      return {payload.begin(), payload.end()};
    case CompressionCode::Deflate:
      return inflate_bytes(payload);
    case CompressionCode::Rle:
      break;
    default:
      raise(ErrorCode::UnknownCompressionCode, "compression code " + std::to_string(static_cast<int>(codec)));
  }
  if (format != FormatCode::Column) {
    raise(ErrorCode::RleRequiresColumn, "value-level runs need the column layout");
  }
  ByteReader reader(payload);
  const auto row_count = reader.u32();
  ColumnBlock block;
  block.schema = schema;
  block.row_count = row_count;
  for (const auto& col : schema.columns()) {
    uint64_t filled = 0;
    switch (col.type) {
      case TypeCode::Int32: {
        std::vector<int32_t> values;
        values.reserve(row_count);
        while (filled < row_count) {
          const auto run = reader.u32();
          if (run == 0 || filled + run > row_count) raise(ErrorCode::CorruptPayload, "bad run length");
          const auto value = static_cast<int32_t>(reader.u32());
          values.insert(values.end(), run, value);
          filled += run;
        }
        block.columns.emplace_back(std::move(values));
        break;
      }
      case TypeCode::Int64: {
        std::vector<int64_t> values;
        values.reserve(row_count);
        while (filled < row_count) {
          const auto run = reader.u32();
          if (run == 0 || filled + run > row_count) raise(ErrorCode::CorruptPayload, "bad run length");
          const auto value = static_cast<int64_t>(reader.u64());
          values.insert(values.end(), run, value);
          filled += run;
        }
        block.columns.emplace_back(std::move(values));
        break;
      }
      case TypeCode::Float64: {
        std::vector<double> values;
        values.reserve(row_count);
        while (filled < row_count) {
          const auto run = reader.u32();
          if (run == 0 || filled + run > row_count) raise(ErrorCode::CorruptPayload, "bad run length");
          const auto value = std::bit_cast<double>(reader.u64());
          values.insert(values.end(), run, value);
          filled += run;
        }
        block.columns.emplace_back(std::move(values));
        break;
      }
      case TypeCode::Bool: {
        std::vector<uint8_t> values;
        values.reserve(row_count);
        while (filled < row_count) {
          const auto run = reader.u32();
          if (run == 0 || filled + run > row_count) raise(ErrorCode::CorruptPayload, "bad run length");
          const auto b = reader.u8();
          if (b > 1) raise(ErrorCode::CorruptPayload, "bool byte " + std::to_string(b));
          values.insert(values.end(), run, b);
          filled += run;
        }
        block.columns.emplace_back(std::move(values));
        break;
      }
      case TypeCode::Text: {
        std::vector<std::string> values;
        values.reserve(row_count);
        while (filled < row_count) {
          const auto run = reader.u32();
          if (run == 0 || filled + run > row_count) raise(ErrorCode::CorruptPayload, "bad run length");
          std::string value(reader.text(reader.u32()));
          values.insert(values.end(), run, value);
          filled += run;
        }
        block.columns.emplace_back(std::move(values));
        break;
      }
    }
  }
  if (!reader.done()) {
    raise(ErrorCode::CorruptPayload, std::to_string(reader.remaining()) + " trailing bytes after rle payload");
  }
  return encode_block_column(block);
}

std::array<uint8_t, kFrameEnvelopeSize> frame_envelope(FrameType type, size_t payload_size) {
  if (payload_size > kMaxFramePayload) {
    raise(ErrorCode::FieldTooLong, "frame payload of " + std::to_string(payload_size) + " bytes");
  }
  if (type == FrameType::EndOfStream && payload_size != 0) {
    raise(ErrorCode::FormatError, "end-of-stream frame must have an empty payload");
  }
  const auto length = static_cast<uint32_t>(payload_size);
  return {static_cast<uint8_t>(type), static_cast<uint8_t>(length & 0xFF),
          static_cast<uint8_t>((length >> 8) & 0xFF), static_cast<uint8_t>((length >> 16) & 0xFF),
          static_cast<uint8_t>((length >> 24) & 0xFF)};
}

std::vector<uint8_t> encode_frame(const Frame& frame) {
  const auto envelope = frame_envelope(frame.type, frame.payload.size());
  std::vector<uint8_t> out;
  out.reserve(kFrameEnvelopeSize + frame.payload.size());
  out.insert(out.end(), envelope.begin(), envelope.end());
  out.insert(out.end(), frame.payload.begin(), frame.payload.end());
  return out;
}

}  // namespace pipegen::wire
