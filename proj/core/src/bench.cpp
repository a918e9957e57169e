#include "pipegen/bench.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <exception>
#include <limits>
#include <numbers>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "pipegen/augtext.hpp"
#include "pipegen/error.hpp"
#include "pipegen/formatopt.hpp"

namespace pipegen::bench {

namespace {

using Clock = std::chrono::steady_clock;

constexpr uint64_t kGolden = 0x9E3779B97F4A7C15ull;

bool rows_match(const Row& a, const Row& b) {
  if (a.size() != b.size()) return false;
  for (size_t i = 0; i < a.size(); ++i) {
    if (!bit_equal(a[i], b[i])) return false;
  }
  return true;
}

}  // namespace

// --- deterministic data ---------------------------------------------------------

uint64_t Rng::next() {
  state_ += kGolden;
  uint64_t z = state_;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

uint64_t Rng::uniform(uint64_t bound) { return next() % (bound + 1); }

double Rng::normal() {
  const double u1 = static_cast<double>((next() >> 11) + 1) * 0x1.0p-53;  // (0, 1]
  const double u2 = static_cast<double>(next() >> 11) * 0x1.0p-53;        // [0, 1)
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

Schema payload_schema(Payload payload) {
  switch (payload) {
    case Payload::BenchSchema:
      return Schema::of({{"", TypeCode::Int64},
                         {"", TypeCode::Int32},
                         {"", TypeCode::Float64},
                         {"", TypeCode::Int32},
                         {"", TypeCode::Float64},
                         {"", TypeCode::Int32},
                         {"", TypeCode::Float64}});
    case Payload::Int:
      return Schema::of({{"", TypeCode::Int64}});
    case Payload::Float:
      return Schema::of({{"", TypeCode::Float64}});
    case Payload::String:
      return Schema::of({{"", TypeCode::Text}});
  }
  raise(ErrorCode::FormatError, "unknown payload kind");
}

Row generate_row(Payload payload, uint64_t n, uint64_t seed, uint64_t index) {
  Rng rng(seed ^ ((index + 1) * kGolden));
  switch (payload) {
    case Payload::BenchSchema: {
      Row row;
      row.reserve(7);
      row.emplace_back(static_cast<int64_t>(index));
      for (int pair = 0; pair < 3; ++pair) {
        row.emplace_back(static_cast<int32_t>(rng.uniform(n)));
        row.emplace_back(rng.normal());
      }
      return row;
    }
    case Payload::Int:
      return Row{Value(static_cast<int64_t>(rng.uniform(n)))};
    case Payload::Float:
      return Row{Value(rng.normal())};
    case Payload::String: {
      static constexpr char kChars[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789";
      const size_t length = 8 + rng.next() % 9;
      std::string text;
      text.reserve(length);
      for (size_t i = 0; i < length; ++i) text += kChars[rng.next() % 62];
      return Row{Value(std::move(text))};
    }
  }
  raise(ErrorCode::FormatError, "unknown payload kind");
}

DatasetStream::DatasetStream(Payload payload, uint64_t n, uint64_t seed, uint32_t worker, uint32_t workers,
                             size_t block_rows)
    : payload_(payload),
      n_(n),
      seed_(seed),
      cursor_(worker),
      stride_(workers),
      block_rows_(block_rows),
      schema_(payload_schema(payload)) {
  if (workers == 0) raise(ErrorCode::FormatError, "worker count must be at least 1");
  if (block_rows == 0) raise(ErrorCode::FormatError, "block size must be at least 1");
  if (payload == Payload::BenchSchema && n > static_cast<uint64_t>(std::numeric_limits<int32_t>::max())) {
    raise(ErrorCode::FormatError, "row count exceeds the 32-bit pair-value range");
  }
}

std::optional<RecordBatch> DatasetStream::next() {
  if (cursor_ >= n_) return std::nullopt;
  RecordBatch batch{schema_, {}};
  batch.rows.reserve(block_rows_);
  while (batch.rows.size() < block_rows_ && cursor_ < n_) {
    batch.rows.push_back(generate_row(payload_, n_, seed_, cursor_));
    cursor_ += stride_;
  }
  return batch;
}

RecordBatch generate_dataset(Payload payload, uint64_t n, uint64_t seed) {
  RecordBatch batch{payload_schema(payload), {}};
  batch.rows.reserve(n);
  for (uint64_t i = 0; i < n; ++i) batch.rows.push_back(generate_row(payload, n, seed, i));
  return batch;
}

// --- mock engines ----------------------------------------------------------------

namespace {

// What a text-exporting engine emits per row: typed values with delimiter and
// terminator fragments between them. Appends into a caller-owned record so a
// tight loop can reuse one arena.
void append_record(AugText& record, const Row& row) {
  static const AugText comma = AugText::from_value(",");
  static const AugText newline = AugText::from_value("\n");
  for (size_t i = 0; i < row.size(); ++i) {
    if (i > 0) record.append(comma);
    record.append_value(row[i]);
  }
  record.append(newline);
}

// Walks one worker's regenerated partition row by row, across block bounds.
class RowCursor {
 public:
  explicit RowCursor(DatasetStream stream) : stream_(std::move(stream)) {}

  const Row* next() {
    if (!batch_ || index_ >= batch_->rows.size()) {
      batch_ = stream_.next();
      index_ = 0;
      if (!batch_) return nullptr;
    }
    return &batch_->rows[index_++];
  }

 private:
  DatasetStream stream_;
  std::optional<RecordBatch> batch_;
  size_t index_ = 0;
};

void check_row(const Row& got, RowCursor& expected, uint64_t ordinal) {
  const Row* want = expected.next();
  if (!want) {
    raise(ErrorCode::VerificationFailure,
          "import produced row " + std::to_string(ordinal) + " past the end of the generated dataset");
  }
  if (!rows_match(got, *want)) {
    raise(ErrorCode::VerificationFailure,
          "imported row " + std::to_string(ordinal) + " differs from the generated dataset");
  }
}

DatasetStream partition_stream(const BenchSpec& spec, uint32_t worker) {
  return DatasetStream(spec.payload, spec.n, spec.seed, worker, spec.workers, spec.block_rows);
}

// Typed import: rows arrive ready to use.
pipe::TransferMetrics consume_typed(const BenchSpec& spec, pipe::RecordSource& source, uint32_t worker,
                                    bool verify) {
  if (!verify && spec.mode == Mode::PipeColumn) {
    // A columnar stream is drained in its wire shape; materializing row
    // objects just to discard them would forfeit the format's advantage.
    while (source.read_block()) {
    }
    return source.metrics();
  }
  RowCursor expected(partition_stream(spec, worker));
  uint64_t ordinal = 0;
  while (auto batch = source.read()) {
    if (!verify) {
      ordinal += batch->rows.size();
      continue;
    }
    for (const Row& row : batch->rows) check_row(row, expected, ordinal++);
  }
  if (verify && expected.next() != nullptr) {
    raise(ErrorCode::VerificationFailure, "import ended before the generated dataset did");
  }
  return source.metrics();
}

Row parse_text_row(const std::string& line, const Schema& schema) {
  const AugText text = AugText::from_value(line);
  const std::vector<AugText> fields = text.split(',');
  if (fields.size() != schema.column_count()) {
    raise(ErrorCode::FormatError, "text row has " + std::to_string(fields.size()) + " fields, expected " +
                                      std::to_string(schema.column_count()));
  }
  Row row;
  row.reserve(fields.size());
  for (size_t i = 0; i < fields.size(); ++i) {
    switch (schema.column(i).type) {
      case TypeCode::Int32: {
        const int64_t v = fields[i].parse_int();
        if (v < std::numeric_limits<int32_t>::min() || v > std::numeric_limits<int32_t>::max()) {
          raise(ErrorCode::FormatError, "value out of 32-bit range in text row");
        }
        row.emplace_back(static_cast<int32_t>(v));
        break;
      }
      case TypeCode::Int64:
        row.emplace_back(fields[i].parse_int());
        break;
      case TypeCode::Float64:
        row.emplace_back(fields[i].parse_float());
        break;
      case TypeCode::Bool: {
        const std::string& word = fields[i].materialize();
        if (word == "true") {
          row.emplace_back(true);
        } else if (word == "false") {
          row.emplace_back(false);
        } else {
          raise(ErrorCode::FormatError, "\"" + word + "\" is not a boolean");
        }
        break;
      }
      case TypeCode::Text:
        row.emplace_back(fields[i].materialize());
        break;
    }
  }
  return row;
}

// Text import: every row is one text value that still needs parsing.
pipe::TransferMetrics consume_text(const BenchSpec& spec, pipe::RecordSource& source, uint32_t worker,
                                   bool verify) {
  const Schema schema = payload_schema(spec.payload);
  RowCursor expected(partition_stream(spec, worker));
  uint64_t ordinal = 0;
  while (auto batch = source.read()) {
    for (const Row& wire_row : batch->rows) {
      const auto* line = std::get_if<std::string>(&wire_row.at(0));
      if (!line) raise(ErrorCode::TypeMismatch, "text pipe delivered a non-text row");
      Row row = parse_text_row(*line, schema);
      if (verify) check_row(row, expected, ordinal);
      ++ordinal;
    }
  }
  if (verify && expected.next() != nullptr) {
    raise(ErrorCode::VerificationFailure, "import ended before the generated dataset did");
  }
  return source.metrics();
}

pipe::TransferMetrics export_typed(const BenchSpec& spec, pipe::RecordSink& sink, uint32_t worker) {
  DatasetStream stream = partition_stream(spec, worker);
  // The engine emits delimiter-joined records; the interceptor takes them
  // apart again without ever rendering the primitives.
  std::optional<formatopt::CsvInterceptor> interceptor;
  AugText record;
  while (auto batch = stream.next()) {
    for (const Row& row : batch->rows) {
      record.clear();
      append_record(record, row);
      if (!interceptor) {
        const auto report = formatopt::infer_delimiter(record);
        // Single-column records carry no delimiter parts at all; any
        // delimiter works since no separator will ever match it.
        interceptor.emplace(report ? report->delimiter : ',');
      }
      interceptor->push_record(record);
    }
    sink.write(interceptor->take_batch());
  }
  sink.close();
  return sink.metrics();
}

pipe::TransferMetrics export_text(const BenchSpec& spec, pipe::RecordSink& sink, uint32_t worker) {
  DatasetStream stream = partition_stream(spec, worker);
  const Schema text_schema = Schema::of({{"", TypeCode::Text}});
  AugText record;
  while (auto batch = stream.next()) {
    RecordBatch out{text_schema, {}};
    out.rows.reserve(batch->rows.size());
    for (const Row& row : batch->rows) {
      record.clear();
      append_record(record, row);
      const std::string& line = record.materialize();
      // Drop the record terminator; the line itself is the payload.
      out.rows.push_back(Row{Value(line.substr(0, line.size() - 1))});
    }
    sink.write(std::move(out));
  }
  sink.close();
  return sink.metrics();
}

pipe::TransferMetrics export_file(const BenchSpec& spec, pipe::RecordSink& sink, uint32_t worker) {
  DatasetStream stream = partition_stream(spec, worker);
  while (auto batch = stream.next()) sink.write(std::move(*batch));
  sink.close();
  return sink.metrics();
}

std::string part_path(const std::string& prefix, uint32_t worker) {
  return prefix + ".part" + std::to_string(worker) + ".csv";
}

}  // namespace

// --- runners ---------------------------------------------------------------------

pipe::TransferMetrics run_export_worker(const BenchSpec& spec, pipe::RecordSink& sink, uint32_t worker) {
  switch (spec.mode) {
    case Mode::FileCsv:
      return export_file(spec, sink, worker);
    case Mode::PipeText:
      return export_text(spec, sink, worker);
    case Mode::PipeRow:
    case Mode::PipeColumn:
      return export_typed(spec, sink, worker);
  }
  raise(ErrorCode::FormatError, "unknown mode");
}

pipe::TransferMetrics run_import_worker(const BenchSpec& spec, pipe::RecordSource& source, uint32_t worker,
                                        bool verify) {
  return spec.mode == Mode::PipeText ? consume_text(spec, source, worker, verify)
                                     : consume_typed(spec, source, worker, verify);
}

void run_workers(uint32_t count, const std::function<void(uint32_t)>& fn) {
  std::vector<std::exception_ptr> errors(count);
  {
    std::vector<std::jthread> threads;
    threads.reserve(count);
    for (uint32_t i = 0; i < count; ++i) {
      threads.emplace_back([&fn, &errors, i] {
        try {
          fn(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      });
    }
  }
  std::exception_ptr timeout;
  for (const std::exception_ptr& e : errors) {
    if (!e) continue;
    try {
      std::rethrow_exception(e);
    } catch (const Error& err) {
      if (err.code() != ErrorCode::LookupTimeout) throw;
      if (!timeout) timeout = e;
    }
  }
  if (timeout) std::rethrow_exception(timeout);
}

BenchResult run_baseline_file(const BenchSpec& spec, const std::string& path_prefix, bool verify) {
  if (spec.mode != Mode::FileCsv) {
    raise(ErrorCode::FormatError, "the file baseline runner only handles file_csv");
  }
  BenchResult result;
  result.spec = spec;
  std::vector<pipe::TransferMetrics> exported(spec.workers);
  std::vector<pipe::TransferMetrics> imported(spec.workers);
  pipe::PipeConfig cfg;
  cfg.block_rows = spec.block_rows;

  const auto t0 = Clock::now();
  run_workers(spec.workers, [&](uint32_t w) {
    auto sink = pipe::open_output(part_path(path_prefix, w), cfg);
    exported[w] = run_export_worker(spec, *sink, w);
  });
  const auto t1 = Clock::now();
  run_workers(spec.workers, [&](uint32_t w) {
    pipe::PipeConfig import_cfg = cfg;
    import_cfg.file_schema = payload_schema(spec.payload);
    auto source = pipe::open_input(part_path(path_prefix, w), import_cfg);
    imported[w] = run_import_worker(spec, *source, w, verify);
  });
  const auto t2 = Clock::now();

  result.export_time = t1 - t0;
  result.import_time = t2 - t1;
  result.total_time = t2 - t0;
  for (const auto& m : exported) result.bytes += m.bytes;
  for (const auto& m : imported) result.rows += m.rows;
  return result;
}

BenchResult run_pipe(const BenchSpec& spec, const std::string& directory_host, uint16_t directory_port,
                     const std::string& query_id, bool verify) {
  if (spec.mode == Mode::FileCsv) {
    raise(ErrorCode::FormatError, "the pipe runner cannot run the file baseline");
  }
  BenchResult result;
  result.spec = spec;
  const std::string target = "db://bench?workers=" + std::to_string(spec.workers);

  pipe::PipeConfig cfg;
  cfg.block_rows = spec.block_rows;
  cfg.directory_host = directory_host;
  cfg.directory_port = directory_port;
  cfg.query_id = query_id;
  if (spec.mode == Mode::PipeRow || spec.mode == Mode::PipeText) cfg.format = wire::FormatCode::Row;
  cfg.codec = spec.codec;

  std::vector<pipe::TransferMetrics> exported(spec.workers);
  std::vector<pipe::TransferMetrics> imported(spec.workers);

  const auto t0 = Clock::now();
  run_workers(spec.workers * 2, [&](uint32_t slot) {
    pipe::PipeConfig worker_cfg = cfg;
    if (slot < spec.workers) {
      const uint32_t w = slot;
      worker_cfg.worker_index = w;
      auto source = pipe::open_input(target, worker_cfg);
      imported[w] = run_import_worker(spec, *source, w, verify);
    } else {
      const uint32_t w = slot - spec.workers;
      worker_cfg.worker_index = w;
      auto sink = pipe::open_output(target, worker_cfg);
      exported[w] = run_export_worker(spec, *sink, w);
    }
  });
  const auto t1 = Clock::now();

  result.total_time = t1 - t0;
  for (const auto& m : exported) {
    result.bytes += m.bytes;
    result.export_time = std::max(result.export_time, m.duration);
  }
  for (const auto& m : imported) {
    result.rows += m.rows;
    result.import_time = std::max(result.import_time, m.duration);
  }
  return result;
}

// --- names and spec files ------------------------------------------------------------

std::string mode_name(Mode mode) {
  switch (mode) {
    case Mode::FileCsv:
      return "file_csv";
    case Mode::PipeText:
      return "pipe_text";
    case Mode::PipeRow:
      return "pipe_row";
    case Mode::PipeColumn:
      return "pipe_column";
  }
  raise(ErrorCode::FormatError, "unknown mode");
}

Mode parse_mode(const std::string& name) {
  if (name == "file_csv") return Mode::FileCsv;
  if (name == "pipe_text") return Mode::PipeText;
  if (name == "pipe_row") return Mode::PipeRow;
  if (name == "pipe_column") return Mode::PipeColumn;
  raise(ErrorCode::FormatError, "unknown mode \"" + name + "\"");
}

std::string payload_name(Payload payload) {
  switch (payload) {
    case Payload::BenchSchema:
      return "bench";
    case Payload::Int:
      return "int";
    case Payload::Float:
      return "float";
    case Payload::String:
      return "string";
  }
  raise(ErrorCode::FormatError, "unknown payload");
}

Payload parse_payload(const std::string& name) {
  if (name == "bench") return Payload::BenchSchema;
  if (name == "int") return Payload::Int;
  if (name == "float") return Payload::Float;
  if (name == "string") return Payload::String;
  raise(ErrorCode::FormatError, "unknown payload \"" + name + "\"");
}

std::string codec_name(wire::CompressionCode codec) {
  switch (codec) {
    case wire::CompressionCode::None:
      return "none";
    case wire::CompressionCode::Rle:
      return "rle";
    case wire::CompressionCode::Deflate:
      return "deflate";
  }
  raise(ErrorCode::FormatError, "unknown codec");
}

wire::CompressionCode parse_codec(const std::string& name) {
  if (name == "none") return wire::CompressionCode::None;
  if (name == "rle") return wire::CompressionCode::Rle;
  if (name == "deflate") return wire::CompressionCode::Deflate;
  raise(ErrorCode::FormatError, "unknown codec \"" + name + "\"");
}

std::optional<BenchSpec> parse_spec_line(const std::string& line) {
  std::istringstream in(line);
  std::string token;
  BenchSpec spec;
  bool any = false;
  while (in >> token) {
    if (token.starts_with('#')) break;
    const size_t eq = token.find('=');
    if (eq == std::string::npos) {
      raise(ErrorCode::FormatError, "benchmark spec token \"" + token + "\" is not key=value");
    }
    const std::string key = token.substr(0, eq);
    const std::string value = token.substr(eq + 1);
    const auto number = [&]() -> uint64_t {
      uint64_t v = 0;
      auto [end, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
      if (ec != std::errc() || end != value.data() + value.size() || value.empty()) {
        raise(ErrorCode::FormatError, "bad number \"" + value + "\" for " + key);
      }
      return v;
    };
    if (key == "mode") {
      spec.mode = parse_mode(value);
    } else if (key == "codec") {
      spec.codec = parse_codec(value);
    } else if (key == "payload") {
      spec.payload = parse_payload(value);
    } else if (key == "n") {
      spec.n = number();
    } else if (key == "seed") {
      spec.seed = number();
    } else if (key == "workers") {
      spec.workers = static_cast<uint32_t>(number());
    } else if (key == "block_rows") {
      spec.block_rows = static_cast<size_t>(number());
    } else {
      raise(ErrorCode::FormatError, "unknown benchmark spec key \"" + key + "\"");
    }
    any = true;
  }
  if (!any) return std::nullopt;
  if (spec.workers == 0) raise(ErrorCode::FormatError, "workers must be at least 1");
  return spec;
}

// --- report ------------------------------------------------------------------------

namespace {

bool same_dataset(const BenchSpec& a, const BenchSpec& b) {
  return a.n == b.n && a.seed == b.seed && a.payload == b.payload && a.workers == b.workers;
}

double to_ms(std::chrono::nanoseconds t) { return static_cast<double>(t.count()) / 1e6; }

}  // namespace

std::string bench_report_text(std::vector<BenchResult>& results) {
  if (results.empty()) raise(ErrorCode::FormatError, "no benchmark results to report");
  for (BenchResult& r : results) {
    r.speedup = 0.0;
    for (const BenchResult& baseline : results) {
      if (baseline.spec.mode != Mode::FileCsv || !same_dataset(baseline.spec, r.spec)) continue;
      if (r.total_time.count() > 0) {
        r.speedup = static_cast<double>(baseline.total_time.count()) /
                    static_cast<double>(r.total_time.count());
      }
      break;
    }
  }

  std::string out;
  char line[256];
  std::snprintf(line, sizeof(line), "%-12s %-8s %-7s %8s %10s %12s %11s %11s %11s %8s\n", "mode", "codec",
                "payload", "workers", "rows", "bytes", "export(ms)", "import(ms)", "total(ms)", "speedup");
  out += line;
  for (const BenchResult& r : results) {
    char speedup[32];
    if (r.speedup > 0) {
      std::snprintf(speedup, sizeof(speedup), "%.2fx", r.speedup);
    } else {
      std::snprintf(speedup, sizeof(speedup), "-");
    }
    std::snprintf(line, sizeof(line), "%-12s %-8s %-7s %8u %10llu %12llu %11.1f %11.1f %11.1f %8s\n",
                  mode_name(r.spec.mode).c_str(), codec_name(r.spec.codec).c_str(),
                  payload_name(r.spec.payload).c_str(), r.spec.workers,
                  static_cast<unsigned long long>(r.rows), static_cast<unsigned long long>(r.bytes),
                  to_ms(r.export_time), to_ms(r.import_time), to_ms(r.total_time), speedup);
    out += line;
  }
  return out;
}

std::string bench_report_jsonl(const std::vector<BenchResult>& results) {
  std::string out;
  for (const BenchResult& r : results) {
    nlohmann::json doc;
    doc["mode"] = mode_name(r.spec.mode);
    doc["codec"] = codec_name(r.spec.codec);
    doc["payload"] = payload_name(r.spec.payload);
    doc["n"] = r.spec.n;
    doc["seed"] = r.spec.seed;
    doc["workers"] = r.spec.workers;
    doc["block_rows"] = r.spec.block_rows;
    doc["rows"] = r.rows;
    doc["bytes"] = r.bytes;
    doc["export_ns"] = r.export_time.count();
    doc["import_ns"] = r.import_time.count();
    doc["total_ns"] = r.total_time.count();
    doc["speedup"] = r.speedup;
    out += doc.dump();
    out += '\n';
  }
  return out;
}

std::vector<BenchResult> parse_report_jsonl(const std::string& text) {
  std::vector<BenchResult> results;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const nlohmann::json doc = nlohmann::json::parse(line, nullptr, false);
    if (doc.is_discarded() || !doc.is_object()) {
      raise(ErrorCode::FormatError, "benchmark report line is not a JSON object");
    }
    BenchResult r;
    r.spec.mode = parse_mode(doc.at("mode").get<std::string>());
    r.spec.codec = parse_codec(doc.at("codec").get<std::string>());
    r.spec.payload = parse_payload(doc.at("payload").get<std::string>());
    r.spec.n = doc.at("n").get<uint64_t>();
    r.spec.seed = doc.at("seed").get<uint64_t>();
    r.spec.workers = doc.at("workers").get<uint32_t>();
    r.spec.block_rows = doc.at("block_rows").get<size_t>();
    r.rows = doc.at("rows").get<uint64_t>();
    r.bytes = doc.at("bytes").get<uint64_t>();
    r.export_time = std::chrono::nanoseconds(doc.at("export_ns").get<int64_t>());
    r.import_time = std::chrono::nanoseconds(doc.at("import_ns").get<int64_t>());
    r.total_time = std::chrono::nanoseconds(doc.at("total_ns").get<int64_t>());
    r.speedup = doc.at("speedup").get<double>();
    results.push_back(r);
  }
  return results;
}

}  // namespace pipegen::bench
