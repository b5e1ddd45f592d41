#include "rbtwin/repository.hpp"

#include <array>
#include <charconv>
#include <sstream>

#include "rbtwin/common.hpp"

namespace rbtwin {

namespace {
constexpr std::array<std::string_view, 4> kKindNames{"traffic", "network", "decision", "fidelity"};

double parse_number(std::string_view s) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size())
    throw std::runtime_error("repository: bad number '" + std::string(s) + "'");
  return v;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || s[i] == sep) {
      out.push_back(s.substr(start, i - start));
      start = i + 1;
    }
  }
  return out;
}
}  // namespace

std::string_view to_string(RecordKind k) noexcept { return kKindNames[static_cast<std::size_t>(k)]; }

std::optional<RecordKind> parse_record_kind(std::string_view s) noexcept {
  for (std::size_t i = 0; i < kKindNames.size(); ++i)
    if (kKindNames[i] == s) return static_cast<RecordKind>(i);
  return std::nullopt;
}

std::optional<double> MetricsRecord::get(std::string_view key) const {
  for (const auto& [k, v] : payload)
    if (k == key) return v;
  return std::nullopt;
}

Repository::Repository(const Repository& other) : records_(other.snapshot()) {}

Repository& Repository::operator=(const Repository& other) {
  if (this != &other) {
    auto copy = other.snapshot();
    std::lock_guard lock(mutex_);
    records_ = std::move(copy);
  }
  return *this;
}

std::uint64_t Repository::append(RecordKind kind, double timestamp, std::string label, Payload payload) {
  std::lock_guard lock(mutex_);
  if (!records_.empty() && timestamp < records_.back().timestamp)
    throw std::logic_error("repository: append out of timestamp order");
  const std::uint64_t seq = records_.size();
  records_.push_back({timestamp, seq, kind, std::move(label), std::move(payload)});
  return seq;
}

std::size_t Repository::size() const {
  std::lock_guard lock(mutex_);
  return records_.size();
}

std::vector<MetricsRecord> Repository::snapshot() const {
  std::lock_guard lock(mutex_);
  return records_;
}

std::string Repository::export_text() const {
  std::ostringstream out;
  for_each([&out](const MetricsRecord& r) {
    out << to_string(r.kind) << '\t' << r.seq << '\t' << format_double(r.timestamp) << '\t' << r.label;
    for (const auto& [k, v] : r.payload) out << '\t' << k << '=' << format_double(v);
    out << '\n';
  });
  return out.str();
}

Repository Repository::parse(std::string_view text) {
  Repository repo;
  for (std::string_view line : split(text, '\n')) {
    if (line.empty()) continue;
    auto fields = split(line, '\t');
    if (fields.size() < 4) throw std::runtime_error("repository: truncated record");
    auto kind = parse_record_kind(fields[0]);
    if (!kind) throw std::runtime_error("repository: unknown record kind '" + std::string(fields[0]) + "'");
    Payload payload;
    for (std::size_t i = 4; i < fields.size(); ++i) {
      const auto eq = fields[i].find('=');
      if (eq == std::string_view::npos) throw std::runtime_error("repository: malformed payload entry");
      payload.emplace_back(std::string(fields[i].substr(0, eq)), parse_number(fields[i].substr(eq + 1)));
    }
    const auto seq = repo.append(*kind, parse_number(fields[2]), std::string(fields[3]), std::move(payload));
    if (static_cast<double>(seq) != parse_number(fields[1]))
      throw std::runtime_error("repository: sequence gap in export");
  }
  return repo;
}

}  // namespace rbtwin
