#pragma once

#include <chrono>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "pipegen/directory.hpp"
#include "pipegen/value.hpp"
#include "pipegen/wire.hpp"

namespace pipegen::pipe {

struct PipeConfig {
  wire::FormatCode format = wire::FormatCode::Column;
  wire::CompressionCode codec = wire::CompressionCode::None;
  size_t block_rows = 4096;

  // Debug mirroring: the exporter writes the first debug_rows records to
  // debug_path while transmitting them; the importer re-reads that file and
  // aborts on any divergence. 0 disables.
  size_t debug_rows = 0;
  std::string debug_path;

  // Rendezvous. register_hostname is what importers publish; worker_index
  // identifies this endpoint among its side's workers.
  std::string directory_host = "127.0.0.1";
  uint16_t directory_port = 0;
  std::string register_hostname = "127.0.0.1";
  uint32_t worker_index = 0;
  std::chrono::milliseconds accept_timeout{60000};

  // Used when the target string carries no query=ID.
  std::string query_id;

  // Worker count announced when the target string carries no workers=K.
  // 0 defers to the target's own default of 1.
  uint32_t worker_count = 0;

  // Alternate reserved-name spelling, e.g. /tmp/__reserved__[Name].
  std::string reserved_template;

  // Column types for parsing a CSV file target on import; inferred from the
  // first record when absent.
  std::optional<Schema> file_schema;
};

struct TransferMetrics {
  uint64_t rows = 0;
  uint64_t bytes = 0;  // bytes on the wire, or file bytes for file targets
  std::chrono::nanoseconds duration{0};
};

class RecordSink {
 public:
  virtual ~RecordSink() = default;
  virtual void write(const RecordBatch& batch) = 0;
  // Sinks that buffer rows take them by move; the default just copies.
  virtual void write(RecordBatch&& batch) { write(batch); }
  virtual void close() = 0;
  virtual const TransferMetrics& metrics() const = 0;
};

class RecordSource {
 public:
  virtual ~RecordSource() = default;
  // One batch per arriving block; nothing once the stream ends.
  virtual std::optional<RecordBatch> read() = 0;
  // Column-major variant for consumers that want the block shape. Sources
  // whose stream is already columnar hand the block over without building
  // row objects; everything else reads a batch and pivots it.
  virtual std::optional<wire::ColumnBlock> read_block() {
    auto batch = read();
    if (!batch) return std::nullopt;
    return wire::pivot(*batch);
  }
  virtual const Schema& schema() const = 0;
  virtual const TransferMetrics& metrics() const = 0;
};

// Stream factory: a plain path gets a CSV file endpoint, a reserved target
// gets a socket pipe endpoint that rendezvouses through the directory.
// Everything downstream of the factory treats the two identically.
std::unique_ptr<RecordSink> open_output(const std::string& target, const PipeConfig& cfg);
std::unique_ptr<RecordSource> open_input(const std::string& target, const PipeConfig& cfg);

// Directory-free pipe endpoints over an explicit peer address: the sink
// connects to a listening receiver, the source connects to a serving sender.
// The byte stream is identical to the directory-brokered one.
std::unique_ptr<RecordSink> open_output_connected(const std::string& host, uint16_t port,
                                                  const PipeConfig& cfg);
std::unique_ptr<RecordSource> open_input_connected(const std::string& host, uint16_t port,
                                                   const PipeConfig& cfg);

// Convenience drivers for whole transfers.
TransferMetrics export_batches(RecordSink& sink, const std::vector<RecordBatch>& batches);
std::vector<RecordBatch> import_batches(RecordSource& source);

// --- verification proxy --------------------------------------------------------

struct ProxyReport {
  uint64_t rows_received = 0;
  uint64_t bytes_received = 0;
  uint64_t rows_sent = 0;
  uint64_t bytes_sent = 0;
};

// Stands in for a remote peer. With an out path: accepts one pipe stream and
// writes it to the file system as canonical CSV. With an in path: accepts a
// further connection and serves the file's records as a pipe stream. Used to
// check pipe semantics against file semantics.
class VerificationProxy {
 public:
  VerificationProxy(uint16_t listen_port, std::string out_path, std::string in_path, PipeConfig cfg);

  // The bound port (useful when constructed with port 0).
  uint16_t port() const { return listener_.port(); }

  // Serves the out phase, then the in phase; returns when both are done.
  ProxyReport run();

 private:
  net::Listener listener_;
  std::string out_path_;
  std::string in_path_;
  PipeConfig cfg_;
};

ProxyReport run_verification_proxy(uint16_t listen_port, const std::string& out_path,
                                   const std::string& in_path, const PipeConfig& cfg);

}  // namespace pipegen::pipe
