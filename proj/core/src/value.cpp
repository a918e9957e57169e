#include "pipegen/value.hpp"

#include <bit>
#include <charconv>
#include <unordered_set>

namespace pipegen {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::BadMagic: return "bad magic";
    case ErrorCode::UnsupportedVersion: return "unsupported version";
    case ErrorCode::UnknownTypeCode: return "unknown type code";
    case ErrorCode::UnknownFormatCode: return "unknown format code";
    case ErrorCode::UnknownCompressionCode: return "unknown compression code";
    case ErrorCode::UnknownFrameType: return "unknown frame type";
    case ErrorCode::TruncatedInput: return "truncated input";
    case ErrorCode::SchemaTooWide: return "schema too wide";
    case ErrorCode::FieldTooLong: return "field too long";
    case ErrorCode::InvalidSchema: return "invalid schema";
    case ErrorCode::TypeMismatch: return "type mismatch";
    case ErrorCode::RleRequiresColumn: return "rle requires column format";
    case ErrorCode::CorruptPayload: return "corrupt payload";
    case ErrorCode::FormatError: return "format error";
    case ErrorCode::NonNumericText: return "non-numeric text";
    case ErrorCode::RowBeforeHeader: return "row before key header";
    case ErrorCode::BitmapMismatch: return "bitmap length mismatch";
    case ErrorCode::MalformedTarget: return "malformed target";
    case ErrorCode::MalformedRequest: return "malformed request";
    case ErrorCode::DuplicateRegistration: return "duplicate registration";
    case ErrorCode::LookupTimeout: return "lookup timeout";
    case ErrorCode::UnsupportedConfiguration: return "unsupported configuration";
    case ErrorCode::ConnectionClosed: return "connection closed";
    case ErrorCode::IoError: return "io error";
    case ErrorCode::VerificationFailure: return "verification failure";
  }
  return "unknown error";
}

const char* type_code_name(TypeCode type) {
  switch (type) {
    case TypeCode::Int32: return "int32";
    case TypeCode::Int64: return "int64";
    case TypeCode::Float64: return "float64";
    case TypeCode::Bool: return "bool";
    case TypeCode::Text: return "text";
  }
  return "invalid";
}

bool is_fixed_width(TypeCode type) {
  return type != TypeCode::Text;
}

size_t fixed_width(TypeCode type) {
  switch (type) {
    case TypeCode::Int32: return 4;
    case TypeCode::Int64: return 8;
    case TypeCode::Float64: return 8;
    case TypeCode::Bool: return 1;
    case TypeCode::Text: return 0;
  }
  return 0;
}

TypeCode type_of(const Value& value) {
  return static_cast<TypeCode>(value.index() + 1);
}

bool bit_equal(const Value& a, const Value& b) {
  if (a.index() != b.index()) return false;
  if (std::holds_alternative<double>(a)) {
    return std::bit_cast<uint64_t>(std::get<double>(a)) == std::bit_cast<uint64_t>(std::get<double>(b));
  }
  return a == b;
}

void render_int64(int64_t v, std::string& out) {
  char buf[24];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  out.append(buf, res.ptr);
}

void render_double(double v, std::string& out) {
  char buf[40];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  out.append(buf, res.ptr);
}

void render_value(const Value& value, std::string& out) {
  switch (type_of(value)) {
    case TypeCode::Int32: render_int64(std::get<int32_t>(value), out); break;
    case TypeCode::Int64: render_int64(std::get<int64_t>(value), out); break;
    case TypeCode::Float64: render_double(std::get<double>(value), out); break;
    case TypeCode::Bool: out.append(std::get<bool>(value) ? "true" : "false"); break;
    case TypeCode::Text: out.append(std::get<std::string>(value)); break;
  }
}

std::string render_value(const Value& value) {
  std::string out;
  render_value(value, out);
  return out;
}

Schema::Schema(std::vector<Column> columns) : columns_(std::move(columns)) {}

Schema Schema::of(std::initializer_list<Column> columns) {
  return Schema(std::vector<Column>(columns));
}

bool utf8_valid(std::string_view text) {
  size_t i = 0;
  const auto n = text.size();
  while (i < n) {
    const auto b = static_cast<unsigned char>(text[i]);
    size_t len;
    uint32_t cp;
    if (b < 0x80) {
      ++i;
      continue;
    } else if ((b & 0xE0) == 0xC0) {
      len = 2;
      cp = b & 0x1F;
    } else if ((b & 0xF0) == 0xE0) {
      len = 3;
      cp = b & 0x0F;
    } else if ((b & 0xF8) == 0xF0) {
      len = 4;
      cp = b & 0x07;
    } else {
      return false;
    }
    if (i + len > n) return false;
    for (size_t k = 1; k < len; ++k) {
      const auto c = static_cast<unsigned char>(text[i + k]);
      if ((c & 0xC0) != 0x80) return false;
      cp = (cp << 6) | (c & 0x3F);
    }
    // reject overlong encodings, surrogates and out-of-range code points
    static constexpr uint32_t min_cp[5] = {0, 0, 0x80, 0x800, 0x10000};
    if (cp < min_cp[len] || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) return false;
    i += len;
  }
  return true;
}

void validate_schema(const Schema& schema) {
  if (schema.column_count() > 0xFFFF) {
    raise(ErrorCode::SchemaTooWide, "schema has " + std::to_string(schema.column_count()) + " columns");
  }
  std::unordered_set<std::string_view> seen;
  for (const auto& col : schema.columns()) {
    switch (col.type) {
      case TypeCode::Int32:
      case TypeCode::Int64:
      case TypeCode::Float64:
      case TypeCode::Bool:
      case TypeCode::Text:
        break;
      default:
        raise(ErrorCode::UnknownTypeCode, "type code " + std::to_string(static_cast<int>(col.type)));
    }
    if (!utf8_valid(col.name)) {
      raise(ErrorCode::InvalidSchema, "column name is not valid UTF-8");
    }
    if (!col.name.empty() && !seen.insert(col.name).second) {
      raise(ErrorCode::InvalidSchema, "duplicate column name '" + col.name + "'");
    }
  }
}

bool RecordBatch::operator==(const RecordBatch& other) const {
  if (schema != other.schema || rows.size() != other.rows.size()) return false;
  for (size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != other.rows[r].size()) return false;
    for (size_t c = 0; c < rows[r].size(); ++c) {
      if (!bit_equal(rows[r][c], other.rows[r][c])) return false;
    }
  }
  return true;
}

void validate_batch(const RecordBatch& batch) {
  validate_schema(batch.schema);
  const auto cols = batch.schema.column_count();
  for (size_t r = 0; r < batch.rows.size(); ++r) {
    const auto& row = batch.rows[r];
    if (row.size() != cols) {
      raise(ErrorCode::TypeMismatch,
            "row " + std::to_string(r) + " has " + std::to_string(row.size()) + " values, schema has " +
                std::to_string(cols));
    }
    for (size_t c = 0; c < cols; ++c) {
      if (type_of(row[c]) != batch.schema.column(c).type) {
        raise(ErrorCode::TypeMismatch, "row " + std::to_string(r) + " column " + std::to_string(c) + " is " +
                                           type_code_name(type_of(row[c])) + ", schema says " +
                                           type_code_name(batch.schema.column(c).type));
      }
    }
  }
}

}  // namespace pipegen
