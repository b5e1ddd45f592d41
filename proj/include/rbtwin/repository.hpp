#pragma once

#include <cstdint>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace rbtwin {

enum class RecordKind : std::uint8_t { Traffic, Network, Decision, Fidelity };

std::string_view to_string(RecordKind k) noexcept;
std::optional<RecordKind> parse_record_kind(std::string_view s) noexcept;

using Payload = std::vector<std::pair<std::string, double>>;

struct MetricsRecord {
  double timestamp = 0.0;
  std::uint64_t seq = 0;
  RecordKind kind = RecordKind::Traffic;
  /// Sub-type within a kind, e.g. "tick", "traversal" or a policy name.
  std::string label;
  Payload payload;

  std::optional<double> get(std::string_view key) const;

  friend bool operator==(const MetricsRecord&, const MetricsRecord&) = default;
};

/// Append-only metrics store. Records are totally ordered by
/// (timestamp, sequence); appends with a timestamp earlier than the last record
/// are rejected. Appends are serialized; readers take consistent snapshots.
class Repository {
 public:
  Repository() = default;
  Repository(const Repository& other);
  Repository& operator=(const Repository& other);

  std::uint64_t append(RecordKind kind, double timestamp, std::string label, Payload payload);

  std::size_t size() const;
  std::vector<MetricsRecord> snapshot() const;

  template <typename Fn>
  void for_each(Fn&& fn) const {
    std::lock_guard lock(mutex_);
    for (const auto& r : records_) fn(r);
  }

  /// One line per record: kind, seq, timestamp, label, key=value pairs
  /// separated by tabs. Numbers use shortest round-trip formatting.
  std::string export_text() const;
  static Repository parse(std::string_view text);

 private:
  mutable std::mutex mutex_;
  std::vector<MetricsRecord> records_;
};

}  // namespace rbtwin
