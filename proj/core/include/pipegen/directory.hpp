#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include "pipegen/net.hpp"

namespace pipegen::directory {

// --- reserved-target grammar -------------------------------------------------

// A destination of the form db://NAME[?workers=K][&query=ID]. Plain paths
// stay plain paths; a configurable filename template (anything containing
// the placeholder [Name], e.g. /tmp/__reserved__[Name]) is an alternate
// spelling of the same grammar for engines that insist on path-shaped names.
struct ReservedTarget {
  std::string system_name;
  std::optional<uint32_t> workers;  // absent means 1
  std::string query_id;             // empty when absent; callers supply one per transfer

  uint32_t worker_count() const { return workers.value_or(1); }
};

struct FilePath {
  std::string path;
};

using Target = std::variant<ReservedTarget, FilePath>;

Target parse_target(const std::string& text, const std::string& reserved_template = "");

// --- directory state ----------------------------------------------------------

struct DirectoryEntry {
  std::string query_id;
  uint32_t worker_index = 0;
  std::string hostname;
  uint16_t port = 0;
};

// Pure reconciliation rule: with more importers than exporters the surplus
// importer indices get stub end-of-stream connections; more exporters than
// importers is an unsupported configuration.
std::vector<uint32_t> reconcile_plan(uint32_t exporter_count, uint32_t importer_count);

// --- service ------------------------------------------------------------------

// Request/response rendezvous server. Importers register their listening
// endpoint under (query id, worker index); exporters look entries up,
// blocking until the importer arrives and claiming each entry exactly once.
// Both sides announce their worker counts so the service can dispatch stub
// end-of-stream connections to importers no exporter will ever claim, or
// reject the transfer when exporters outnumber importers.
class DirectoryService {
 public:
  struct Options {
    uint16_t port = 0;  // 0 picks an ephemeral port
    std::chrono::milliseconds lookup_timeout{60000};
  };

  DirectoryService();
  explicit DirectoryService(Options options);
  ~DirectoryService();

  DirectoryService(const DirectoryService&) = delete;
  DirectoryService& operator=(const DirectoryService&) = delete;

  uint16_t port() const { return port_; }
  void stop();

  // Number of stub connections dispatched for a query (test observability).
  size_t stub_count(const std::string& query_id) const;

 private:
  struct Registration {
    std::string hostname;
    uint16_t port = 0;
    bool claimed = false;
    bool stubbed = false;
  };
  struct QueryState {
    std::optional<uint32_t> exporters;
    std::optional<uint32_t> importers;
    std::map<uint32_t, Registration> entries;
    size_t stubs_sent = 0;
  };
  struct Handler {
    std::atomic<bool> done{false};
    std::jthread thread;
  };

  void accept_loop();
  void handle(net::Socket client);
  void sweep_handlers();
  // Collects newly stub-eligible importers under the lock; connections happen
  // on the calling thread after the lock is released.
  std::vector<DirectoryEntry> take_stub_jobs(const std::string& query_id, QueryState& state);
  void send_stub(const DirectoryEntry& entry);

  Options options_;
  net::Listener listener_;
  uint16_t port_ = 0;
  std::atomic<bool> stop_{false};

  mutable std::mutex mu_;
  std::condition_variable cv_;
  std::map<std::string, QueryState> queries_;

  std::vector<std::unique_ptr<Handler>> handlers_;
  std::jthread accept_thread_;
};

// --- client -------------------------------------------------------------------

// One connection per request; lookup blocks until the service resolves or
// times out the request.
class DirectoryClient {
 public:
  DirectoryClient(std::string host, uint16_t port) : host_(std::move(host)), port_(port) {}

  // side: how many workers this caller's side brings to the query.
  void announce(const std::string& query_id, bool import_side, uint32_t worker_count);
  void register_importer(const std::string& query_id, uint32_t worker_index, const std::string& hostname,
                         uint16_t port);
  DirectoryEntry lookup(const std::string& query_id, uint32_t worker_index);

 private:
  net::Socket send_request(const std::vector<uint8_t>& request);

  std::string host_;
  uint16_t port_ = 0;
};

}  // namespace pipegen::directory
