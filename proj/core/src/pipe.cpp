#include "pipegen/pipe.hpp"

#include <charconv>
#include <cstring>
#include <deque>
#include <fstream>
#include <utility>

#include "pipegen/error.hpp"
#include "pipegen/formatopt.hpp"

namespace pipegen::pipe {

namespace {

using Clock = std::chrono::steady_clock;

std::string resolve_query_id(const directory::ReservedTarget& target, const PipeConfig& cfg) {
  if (!target.query_id.empty()) return target.query_id;
  if (!cfg.query_id.empty()) return cfg.query_id;
  return target.system_name;
}

uint32_t resolve_worker_count(const directory::ReservedTarget& target, const PipeConfig& cfg) {
  if (target.workers) return *target.workers;
  return cfg.worker_count > 0 ? cfg.worker_count : 1;
}

// --- CSV text helpers ---------------------------------------------------------

constexpr char kFileDelimiter = ',';

Value parse_field(std::string_view field, TypeCode type) {
  switch (type) {
    case TypeCode::Int32: {
      int32_t v = 0;
      auto [end, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
      if (ec != std::errc() || end != field.data() + field.size() || field.empty()) {
        raise(ErrorCode::FormatError, "\"" + std::string(field) + "\" is not a 32-bit integer");
      }
      return Value(v);
    }
    case TypeCode::Int64: {
      int64_t v = 0;
      auto [end, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
      if (ec != std::errc() || end != field.data() + field.size() || field.empty()) {
        raise(ErrorCode::FormatError, "\"" + std::string(field) + "\" is not a 64-bit integer");
      }
      return Value(v);
    }
    case TypeCode::Float64: {
      double v = 0;
      auto [end, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
      if (ec != std::errc() || end != field.data() + field.size() || field.empty()) {
        raise(ErrorCode::FormatError, "\"" + std::string(field) + "\" is not a number");
      }
      return Value(v);
    }
    case TypeCode::Bool: {
      if (field == "true") return Value(true);
      if (field == "false") return Value(false);
      raise(ErrorCode::FormatError, "\"" + std::string(field) + "\" is not a boolean");
    }
    case TypeCode::Text:
      return Value(std::string(field));
  }
  raise(ErrorCode::UnknownTypeCode, "bad column type");
}

TypeCode infer_field_type(std::string_view field) {
  {
    int64_t v = 0;
    auto [end, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (ec == std::errc() && end == field.data() + field.size() && !field.empty()) return TypeCode::Int64;
  }
  {
    double v = 0;
    auto [end, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (ec == std::errc() && end == field.data() + field.size() && !field.empty()) return TypeCode::Float64;
  }
  if (field == "true" || field == "false") return TypeCode::Bool;
  return TypeCode::Text;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  size_t start = 0;
  while (true) {
    const size_t pos = line.find(kFileDelimiter, start);
    if (pos == std::string_view::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

// --- file endpoints -------------------------------------------------------------

class FileCsvSink : public RecordSink {
 public:
  explicit FileCsvSink(const std::string& path) : path_(path), out_(path, std::ios::binary | std::ios::trunc) {
    if (!out_) raise(ErrorCode::IoError, "cannot open " + path + " for writing");
  }

  using RecordSink::write;
  void write(const RecordBatch& batch) override {
    touch();
    buffer_.clear();
    for (const Row& row : batch.rows) formatopt::csv_reconstruct_row(buffer_, row, kFileDelimiter);
    out_.write(buffer_.data(), static_cast<std::streamsize>(buffer_.size()));
    if (!out_) raise(ErrorCode::IoError, "write to " + path_ + " failed");
    metrics_.rows += batch.rows.size();
    metrics_.bytes += buffer_.size();
  }

  void close() override {
    if (!out_.is_open()) return;
    touch();
    out_.flush();
    out_.close();
    if (!out_) raise(ErrorCode::IoError, "flush of " + path_ + " failed");
    metrics_.duration = Clock::now() - start_;
  }

  const TransferMetrics& metrics() const override { return metrics_; }

 private:
  void touch() {
    if (!started_) {
      start_ = Clock::now();
      started_ = true;
    }
  }

  std::string path_;
  std::ofstream out_;
  std::string buffer_;
  TransferMetrics metrics_;
  Clock::time_point start_;
  bool started_ = false;
};

class FileCsvSource : public RecordSource {
 public:
  FileCsvSource(const std::string& path, const PipeConfig& cfg)
      : path_(path), block_rows_(cfg.block_rows), declared_schema_(cfg.file_schema) {}

  std::optional<RecordBatch> read() override {
    ensure_schema();
    if (finished_ && pending_.empty()) {
      finish();
      return std::nullopt;
    }
    RecordBatch batch{schema_, {}};
    if (!pending_.empty()) {
      batch.rows.push_back(std::move(pending_.front()));
      pending_.clear();
    }
    std::string line;
    while (batch.rows.size() < block_rows_ && std::getline(in_, line)) {
      metrics_.bytes += line.size() + 1;
      batch.rows.push_back(parse_line(line));
    }
    if (!in_) finished_ = true;
    if (batch.rows.empty()) {
      finish();
      return std::nullopt;
    }
    metrics_.rows += batch.rows.size();
    return batch;
  }

  const Schema& schema() const override {
    const_cast<FileCsvSource*>(this)->ensure_schema();
    return schema_;
  }

  const TransferMetrics& metrics() const override { return metrics_; }

 private:
  void ensure_schema() {
    if (opened_) return;
    opened_ = true;
    start_ = Clock::now();
    in_.open(path_, std::ios::binary);
    if (!in_) raise(ErrorCode::IoError, "cannot open " + path_ + " for reading");
    std::string line;
    if (!std::getline(in_, line)) {
      schema_ = declared_schema_.value_or(Schema{});
      finished_ = true;
      return;
    }
    metrics_.bytes += line.size() + 1;
    if (declared_schema_) {
      schema_ = *declared_schema_;
    } else {
      std::vector<Column> columns;
      for (std::string_view field : split_fields(line)) columns.push_back({"", infer_field_type(field)});
      schema_ = Schema(std::move(columns));
    }
    pending_.push_back(parse_line(line));
  }

  Row parse_line(const std::string& line) {
    const std::vector<std::string_view> fields = split_fields(line);
    if (fields.size() != schema_.column_count()) {
      raise(ErrorCode::FormatError, path_ + ": record has " + std::to_string(fields.size()) +
                                        " fields, expected " + std::to_string(schema_.column_count()));
    }
    Row row;
    row.reserve(fields.size());
    for (size_t i = 0; i < fields.size(); ++i) row.push_back(parse_field(fields[i], schema_.column(i).type));
    return row;
  }

  void finish() {
    if (done_) return;
    done_ = true;
    metrics_.duration = Clock::now() - start_;
  }

  std::string path_;
  size_t block_rows_;
  std::optional<Schema> declared_schema_;
  std::ifstream in_;
  Schema schema_;
  std::vector<Row> pending_;  // first record, parsed during schema inference
  bool opened_ = false;
  bool finished_ = false;
  bool done_ = false;
  TransferMetrics metrics_;
  Clock::time_point start_;
};

// --- socket pipe endpoints -------------------------------------------------------

// Reads the variable-length transfer header off a socket: fixed prefix first,
// then each length-prefixed section, handing the reassembled bytes to the
// regular decoder for full validation.
wire::DecodedHeader read_stream_header(net::Socket& socket) {
  std::vector<uint8_t> buf(8);
  socket.read_exact(buf.data(), 8);
  if (std::memcmp(buf.data(), wire::kMagic, 4) != 0) {
    raise(ErrorCode::BadMagic, "stream does not start with a transfer header");
  }
  const uint16_t version = static_cast<uint16_t>(buf[4] | (buf[5] << 8));
  if (version != wire::kVersion) {
    raise(ErrorCode::UnsupportedVersion, "peer speaks version " + std::to_string(version));
  }

  const auto more = [&socket, &buf](size_t n) {
    const size_t off = buf.size();
    buf.resize(off + n);
    socket.read_exact(buf.data() + off, n);
  };
  const auto last_u16 = [&buf] {
    return static_cast<uint16_t>(buf[buf.size() - 2] | (buf[buf.size() - 1] << 8));
  };

  more(2);  // query id length
  more(last_u16());
  more(2);  // column count
  const uint16_t columns = last_u16();
  for (uint16_t i = 0; i < columns; ++i) {
    more(3);  // type code + name length
    more(last_u16());
  }
  return wire::decode_header(buf);
}

class PipeSink : public RecordSink {
 public:
  PipeSink(net::Socket socket, const PipeConfig& cfg, std::string query_id)
      : socket_(std::move(socket)), cfg_(cfg), query_id_(std::move(query_id)) {
    effective_format_ = cfg_.codec == wire::CompressionCode::Rle ? wire::FormatCode::Column : cfg_.format;
    sender_ = std::thread([this] { sender_loop(); });
  }

  // No end-of-stream on destruction: an abandoned sink still ships the
  // blocks write() accepted, but the missing terminator must surface on the
  // importer as a hard connection error, never as a clean short stream.
  ~PipeSink() override {
    stop_sender();
    if (!closed_) socket_.close();
  }

  void write(const RecordBatch& batch) override {
    stage(batch);
    for (const Row& row : batch.rows) pending_.push_back(row);
    while (pending_.size() >= cfg_.block_rows) enqueue_block(cfg_.block_rows);
  }

  void write(RecordBatch&& batch) override {
    stage(batch);
    for (Row& row : batch.rows) pending_.push_back(std::move(row));
    while (pending_.size() >= cfg_.block_rows) enqueue_block(cfg_.block_rows);
  }

  void close() override {
    if (closed_) return;
    closed_ = true;
    touch();
    if (!header_sent_) send_header(Schema{});
    if (!pending_.empty()) enqueue_block(pending_.size());
    finish_mirror();
    stop_sender();
    metrics_.rows += sent_rows_;
    metrics_.bytes += sent_bytes_;
    if (sender_error_) {
      metrics_.duration = Clock::now() - start_;
      socket_.close();
      std::rethrow_exception(sender_error_);
    }
    const std::vector<uint8_t> eos = wire::encode_frame({wire::FrameType::EndOfStream, {}});
    socket_.write_all(eos);
    metrics_.bytes += eos.size();
    metrics_.duration = Clock::now() - start_;
    socket_.close();
  }

  const TransferMetrics& metrics() const override { return metrics_; }

 private:
  void touch() {
    if (!started_) {
      start_ = Clock::now();
      started_ = true;
    }
  }

  // Everything write() does before the rows are buffered; the mirror must see
  // the rows while the caller still owns them.
  void stage(const RecordBatch& batch) {
    touch();
    if (!header_sent_) {
      send_header(batch.schema);
    } else if (!(batch.schema == schema_)) {
      raise(ErrorCode::InvalidSchema, "batch schema changed mid-stream");
    }
    mirror(batch);
  }

  void send_header(const Schema& schema) {
    schema_ = schema;
    wire::TransferHeader header{effective_format_, cfg_.codec, query_id_, schema_};
    const std::vector<uint8_t> bytes = wire::encode_header(header);
    socket_.write_all(bytes);
    metrics_.bytes += bytes.size();
    header_sent_ = true;
  }

  // First-n debug mirroring: rows reach the file (flushed) strictly before
  // the frame carrying them reaches the socket.
  void mirror(const RecordBatch& batch) {
    if (cfg_.debug_rows == 0 || cfg_.debug_path.empty() || mirrored_ >= cfg_.debug_rows) return;
    if (!mirror_out_.is_open()) {
      mirror_out_.open(cfg_.debug_path, std::ios::binary | std::ios::trunc);
      if (!mirror_out_) raise(ErrorCode::IoError, "cannot open mirror file " + cfg_.debug_path);
    }
    std::string text;
    for (const Row& row : batch.rows) {
      if (mirrored_ >= cfg_.debug_rows) break;
      formatopt::csv_reconstruct_row(text, row, kFileDelimiter);
      ++mirrored_;
    }
    mirror_out_.write(text.data(), static_cast<std::streamsize>(text.size()));
    mirror_out_.flush();
    if (!mirror_out_) raise(ErrorCode::IoError, "write to mirror file " + cfg_.debug_path + " failed");
    if (mirrored_ >= cfg_.debug_rows) mirror_out_.close();
  }

  void finish_mirror() {
    if (cfg_.debug_rows == 0 || cfg_.debug_path.empty()) return;
    if (!mirror_out_.is_open() && mirrored_ == 0) {
      // Nothing was transmitted; leave an empty mirror so the importer can
      // still verify.
      mirror_out_.open(cfg_.debug_path, std::ios::binary | std::ios::trunc);
    }
    if (mirror_out_.is_open()) mirror_out_.close();
  }

  // Encoding and socket writes happen on the sender thread so the exporting
  // engine is never stalled on them; the queue is bounded to keep at most a
  // few blocks in flight.
  void enqueue_block(size_t rows) {
    RecordBatch block{schema_, {}};
    block.rows.reserve(rows);
    for (size_t i = 0; i < rows; ++i) {
      block.rows.push_back(std::move(pending_.front()));
      pending_.pop_front();
    }
    std::unique_lock lock(mu_);
    cv_.wait(lock, [this] { return sender_done_ || queue_.size() < kMaxQueuedBlocks; });
    if (sender_error_) std::rethrow_exception(sender_error_);
    queue_.push_back(std::move(block));
    lock.unlock();
    cv_.notify_all();
  }

  void sender_loop() {
    try {
      while (true) {
        RecordBatch block;
        {
          std::unique_lock lock(mu_);
          cv_.wait(lock, [this] { return queue_closed_ || !queue_.empty(); });
          if (queue_.empty()) break;  // closed and drained
          block = std::move(queue_.front());
          queue_.pop_front();
        }
        cv_.notify_all();
        std::vector<uint8_t> payload = effective_format_ == wire::FormatCode::Row
                                           ? wire::encode_block_row(block)
                                           : wire::encode_block_column(wire::pivot(block));
        if (cfg_.codec != wire::CompressionCode::None) {
          payload = wire::compress(payload, cfg_.codec, schema_, effective_format_);
        }
        const auto envelope = wire::frame_envelope(wire::FrameType::Data, payload.size());
        socket_.write_all(envelope.data(), envelope.size());
        socket_.write_all(payload);
        sent_rows_ += block.rows.size();
        sent_bytes_ += envelope.size() + payload.size();
      }
    } catch (...) {
      std::scoped_lock lock(mu_);
      sender_error_ = std::current_exception();
    }
    {
      std::scoped_lock lock(mu_);
      sender_done_ = true;
    }
    cv_.notify_all();
  }

  void stop_sender() {
    {
      std::scoped_lock lock(mu_);
      queue_closed_ = true;
    }
    cv_.notify_all();
    if (sender_.joinable()) sender_.join();
  }

  static constexpr size_t kMaxQueuedBlocks = 4;

  net::Socket socket_;
  PipeConfig cfg_;
  std::string query_id_;
  wire::FormatCode effective_format_;
  Schema schema_;
  std::deque<Row> pending_;
  std::ofstream mirror_out_;
  size_t mirrored_ = 0;
  bool header_sent_ = false;
  bool closed_ = false;
  bool started_ = false;
  TransferMetrics metrics_;
  Clock::time_point start_;

  // Sender-thread state. The schema and config are settled before the first
  // block is queued, so the sender reads them without the lock; the row and
  // byte tallies are the sender's alone until the join in close().
  std::mutex mu_;
  std::condition_variable cv_;
  std::deque<RecordBatch> queue_;
  bool queue_closed_ = false;
  bool sender_done_ = false;
  std::exception_ptr sender_error_;
  uint64_t sent_rows_ = 0;
  uint64_t sent_bytes_ = 0;
  std::thread sender_;
};

class PipeSource : public RecordSource {
 public:
  // Directory flow: already listening, exporter connects to us.
  PipeSource(net::Listener listener, const PipeConfig& cfg) : listener_(std::move(listener)), cfg_(cfg) {}

  // Direct flow: we connected to a serving peer.
  PipeSource(net::Socket socket, const PipeConfig& cfg) : socket_(std::move(socket)), cfg_(cfg) {}

  std::optional<RecordBatch> read() override {
    auto plain = next_data_payload();
    if (!plain) return std::nullopt;
    RecordBatch batch = header_.format == wire::FormatCode::Row
                            ? wire::decode_block_row(*plain, header_.schema)
                            : wire::unpivot(wire::decode_block_column(*plain, header_.schema));
    metrics_.rows += batch.rows.size();
    observe_for_verification(batch);
    return batch;
  }

  std::optional<wire::ColumnBlock> read_block() override {
    if (finished_) return std::nullopt;
    ensure_stream();
    // Row-format streams and mirror-checked imports still go through rows.
    if (header_.format != wire::FormatCode::Column || (cfg_.debug_rows > 0 && !cfg_.debug_path.empty())) {
      return RecordSource::read_block();
    }
    auto plain = next_data_payload();
    if (!plain) return std::nullopt;
    wire::ColumnBlock block = wire::decode_block_column(*plain, header_.schema);
    metrics_.rows += block.row_count;
    return block;
  }

  const Schema& schema() const override {
    const_cast<PipeSource*>(this)->ensure_stream();
    return header_.schema;
  }

  const TransferMetrics& metrics() const override { return metrics_; }

 private:
  void ensure_stream() {
    if (header_read_) return;
    start_ = Clock::now();
    if (!socket_.valid()) {
      auto accepted = listener_.accept_for(static_cast<int>(cfg_.accept_timeout.count()));
      if (!accepted) {
        raise(ErrorCode::LookupTimeout, "no exporter connected before the deadline");
      }
      socket_ = std::move(*accepted);
      listener_.close();
    }
    wire::DecodedHeader decoded = read_stream_header(socket_);
    header_ = std::move(decoded.header);
    metrics_.bytes += decoded.consumed;
    header_read_ = true;
  }

  // Pulls the next frame and hands back its decompressed payload; nothing
  // once the end-of-stream frame arrives.
  std::optional<std::vector<uint8_t>> next_data_payload() {
    if (finished_) return std::nullopt;
    ensure_stream();
    uint8_t envelope[wire::kFrameEnvelopeSize];
    if (!socket_.read_exact_or_eof(envelope, sizeof(envelope))) {
      raise(ErrorCode::ConnectionClosed, "pipe closed before end of stream");
    }
    const uint8_t type = envelope[0];
    const uint32_t length = static_cast<uint32_t>(envelope[1]) | (static_cast<uint32_t>(envelope[2]) << 8) |
                            (static_cast<uint32_t>(envelope[3]) << 16) |
                            (static_cast<uint32_t>(envelope[4]) << 24);
    if (length > wire::kMaxFramePayload) {
      raise(ErrorCode::CorruptPayload, "frame length " + std::to_string(length) + " exceeds the limit");
    }
    std::vector<uint8_t> payload(length);
    if (length > 0) socket_.read_exact(payload.data(), length);
    metrics_.bytes += sizeof(envelope) + length;

    switch (static_cast<wire::FrameType>(type)) {
      case wire::FrameType::Data:
        if (header_.compression == wire::CompressionCode::None) return payload;
        return wire::decompress(payload, header_.compression, header_.schema, header_.format);
      case wire::FrameType::EndOfStream: {
        if (length != 0) raise(ErrorCode::FormatError, "end-of-stream frame carries a payload");
        finished_ = true;
        verify_mirror();
        metrics_.duration = Clock::now() - start_;
        socket_.close();
        return std::nullopt;
      }
      case wire::FrameType::KeyHeader:
      case wire::FrameType::KeyExtend:
      case wire::FrameType::VerbatimRow:
      case wire::FrameType::BitmapRow:
        raise(ErrorCode::FormatError, "document frame in a typed batch stream");
      default:
        raise(ErrorCode::UnknownFrameType, "unknown frame type " + std::to_string(type));
    }
  }

  // Accumulates the first debug_rows records as canonical text and checks
  // them against the exporter's mirror file.
  void observe_for_verification(const RecordBatch& batch) {
    if (cfg_.debug_rows == 0 || cfg_.debug_path.empty() || verified_) return;
    for (const Row& row : batch.rows) {
      if (observed_ >= cfg_.debug_rows) break;
      formatopt::csv_reconstruct_row(observed_text_, row, kFileDelimiter);
      ++observed_;
    }
    if (observed_ >= cfg_.debug_rows) verify_mirror();
  }

  void verify_mirror() {
    if (cfg_.debug_rows == 0 || cfg_.debug_path.empty() || verified_) return;
    verified_ = true;
    std::ifstream in(cfg_.debug_path, std::ios::binary);
    if (!in) {
      raise(ErrorCode::VerificationFailure, "mirror file " + cfg_.debug_path + " is missing");
    }
    std::string mirrored((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (mirrored == observed_text_) return;

    // Name the first record that differs.
    size_t index = 0;
    size_t a = 0;
    size_t b = 0;
    while (true) {
      const size_t ea = mirrored.find('\n', a);
      const size_t eb = observed_text_.find('\n', b);
      const std::string_view file_line =
          ea == std::string::npos ? std::string_view(mirrored).substr(a)
                                  : std::string_view(mirrored).substr(a, ea - a);
      const std::string_view pipe_line =
          eb == std::string::npos ? std::string_view(observed_text_).substr(b)
                                  : std::string_view(observed_text_).substr(b, eb - b);
      if (file_line != pipe_line) {
        raise(ErrorCode::VerificationFailure,
              "record " + std::to_string(index) + " diverges between the mirror file and the pipe");
      }
      if (ea == std::string::npos || eb == std::string::npos) {
        raise(ErrorCode::VerificationFailure, "mirror file and pipe disagree on record count");
      }
      a = ea + 1;
      b = eb + 1;
      ++index;
    }
  }

  net::Listener listener_;
  net::Socket socket_;
  PipeConfig cfg_;
  wire::TransferHeader header_;
  bool header_read_ = false;
  bool finished_ = false;
  size_t observed_ = 0;
  std::string observed_text_;
  bool verified_ = false;
  TransferMetrics metrics_;
  Clock::time_point start_;
};

}  // namespace

// --- factories -------------------------------------------------------------------

std::unique_ptr<RecordSink> open_output(const std::string& target, const PipeConfig& cfg) {
  directory::Target parsed = directory::parse_target(target, cfg.reserved_template);
  if (const auto* file = std::get_if<directory::FilePath>(&parsed)) {
    return std::make_unique<FileCsvSink>(file->path);
  }
  const auto& reserved = std::get<directory::ReservedTarget>(parsed);
  const std::string query_id = resolve_query_id(reserved, cfg);
  directory::DirectoryClient client(cfg.directory_host, cfg.directory_port);
  client.announce(query_id, /*import_side=*/false, resolve_worker_count(reserved, cfg));
  const directory::DirectoryEntry entry = client.lookup(query_id, cfg.worker_index);
  net::Socket socket = net::connect_to(entry.hostname, entry.port);
  return std::make_unique<PipeSink>(std::move(socket), cfg, query_id);
}

std::unique_ptr<RecordSource> open_input(const std::string& target, const PipeConfig& cfg) {
  directory::Target parsed = directory::parse_target(target, cfg.reserved_template);
  if (const auto* file = std::get_if<directory::FilePath>(&parsed)) {
    return std::make_unique<FileCsvSource>(file->path, cfg);
  }
  const auto& reserved = std::get<directory::ReservedTarget>(parsed);
  const std::string query_id = resolve_query_id(reserved, cfg);
  net::Listener listener = net::Listener::bind_any(0);
  directory::DirectoryClient client(cfg.directory_host, cfg.directory_port);
  client.announce(query_id, /*import_side=*/true, resolve_worker_count(reserved, cfg));
  client.register_importer(query_id, cfg.worker_index, cfg.register_hostname, listener.port());
  return std::make_unique<PipeSource>(std::move(listener), cfg);
}

std::unique_ptr<RecordSink> open_output_connected(const std::string& host, uint16_t port,
                                                  const PipeConfig& cfg) {
  net::Socket socket = net::connect_to(host, port);
  const std::string query_id = cfg.query_id.empty() ? "direct" : cfg.query_id;
  return std::make_unique<PipeSink>(std::move(socket), cfg, query_id);
}

std::unique_ptr<RecordSource> open_input_connected(const std::string& host, uint16_t port,
                                                   const PipeConfig& cfg) {
  net::Socket socket = net::connect_to(host, port);
  return std::make_unique<PipeSource>(std::move(socket), cfg);
}

TransferMetrics export_batches(RecordSink& sink, const std::vector<RecordBatch>& batches) {
  for (const RecordBatch& batch : batches) sink.write(batch);
  sink.close();
  return sink.metrics();
}

std::vector<RecordBatch> import_batches(RecordSource& source) {
  std::vector<RecordBatch> batches;
  while (auto batch = source.read()) batches.push_back(std::move(*batch));
  return batches;
}

// --- verification proxy -------------------------------------------------------------

VerificationProxy::VerificationProxy(uint16_t listen_port, std::string out_path, std::string in_path,
                                     PipeConfig cfg)
    : listener_(net::Listener::bind_any(listen_port)),
      out_path_(std::move(out_path)),
      in_path_(std::move(in_path)),
      cfg_(std::move(cfg)) {}

ProxyReport VerificationProxy::run() {
  ProxyReport report;
  if (!out_path_.empty()) {
    auto accepted = listener_.accept_for(static_cast<int>(cfg_.accept_timeout.count()));
    if (!accepted) raise(ErrorCode::LookupTimeout, "no exporter connected to the proxy");
    PipeSource source(std::move(*accepted), cfg_);
    std::ofstream out(out_path_, std::ios::binary | std::ios::trunc);
    if (!out) raise(ErrorCode::IoError, "cannot open " + out_path_ + " for writing");
    std::string text;
    while (auto batch = source.read()) {
      text.clear();
      for (const Row& row : batch->rows) formatopt::csv_reconstruct_row(text, row, kFileDelimiter);
      out.write(text.data(), static_cast<std::streamsize>(text.size()));
    }
    out.close();
    if (!out) raise(ErrorCode::IoError, "write to " + out_path_ + " failed");
    report.rows_received = source.metrics().rows;
    report.bytes_received = source.metrics().bytes;
  }
  if (!in_path_.empty()) {
    auto accepted = listener_.accept_for(static_cast<int>(cfg_.accept_timeout.count()));
    if (!accepted) raise(ErrorCode::LookupTimeout, "no importer connected to the proxy");
    const std::string query_id = cfg_.query_id.empty() ? "proxy" : cfg_.query_id;
    PipeSink sink(std::move(*accepted), cfg_, query_id);
    FileCsvSource file(in_path_, cfg_);
    while (auto batch = file.read()) sink.write(*batch);
    sink.close();
    report.rows_sent = sink.metrics().rows;
    report.bytes_sent = sink.metrics().bytes;
  }
  return report;
}

ProxyReport run_verification_proxy(uint16_t listen_port, const std::string& out_path,
                                   const std::string& in_path, const PipeConfig& cfg) {
  VerificationProxy proxy(listen_port, out_path, in_path, cfg);
  return proxy.run();
}

}  // namespace pipegen::pipe
