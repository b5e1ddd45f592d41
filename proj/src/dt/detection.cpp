#include "rbtwin/dt/detection.hpp"

#include <array>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

namespace rbtwin::dt {

namespace {
constexpr std::array<std::string_view, 4> kCategoryNames{"car", "truck", "bus", "unknown"};

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    out.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

template <typename T>
bool parse_number(std::string_view s, T& out) {
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc() && ptr == end;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ')) s.remove_suffix(1);
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  return s;
}
}  // namespace

std::string_view to_string(Category c) noexcept { return kCategoryNames[static_cast<std::size_t>(c)]; }

std::optional<Category> parse_category(std::string_view s) noexcept {
  for (std::size_t i = 0; i < kCategoryNames.size(); ++i)
    if (kCategoryNames[i] == s) return static_cast<Category>(i);
  return std::nullopt;
}

std::vector<Detection> read_trace(std::istream& in) {
  std::vector<Detection> out;
  std::string line;
  std::size_t lineno = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++lineno;
    const auto text = trim(line);
    if (text.empty()) continue;
    if (!header) {
      if (text != kTraceHeader) throw TraceError(lineno, "expected header '" + std::string(kTraceHeader) + "'");
      header = true;
      continue;
    }
    const auto cols = split(text, ',');
    if (cols.size() != 6) throw TraceError(lineno, "expected 6 columns");
    Detection d;
    if (!parse_number(trim(cols[0]), d.timestamp)) throw TraceError(lineno, "bad timestamp_s");
    if (!parse_number(trim(cols[1]), d.track_id)) throw TraceError(lineno, "bad track_id");
    auto cat = parse_category(trim(cols[2]));
    if (!cat) throw TraceError(lineno, "bad category");
    d.category = *cat;
    auto lane = traffic::parse_lane(trim(cols[3]));
    if (!lane) throw TraceError(lineno, "bad lane");
    d.lane = *lane;
    if (!parse_number(trim(cols[4]), d.offset)) throw TraceError(lineno, "bad offset_m");
    if (!parse_number(trim(cols[5]), d.speed)) throw TraceError(lineno, "bad speed_mps");
    out.push_back(d);
  }
  if (!header) throw TraceError(lineno, "missing header");
  return out;
}

std::vector<Detection> load_trace(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open trace " + path.string());
  return read_trace(in);
}

void write_trace(std::ostream& out, std::span<const Detection> detections) {
  out << kTraceHeader << '\n';
  for (const auto& d : detections)
    out << format_double(d.timestamp) << ',' << d.track_id << ',' << to_string(d.category) << ','
        << traffic::to_string(d.lane) << ',' << format_double(d.offset) << ',' << format_double(d.speed) << '\n';
}

void save_trace(const std::filesystem::path& path, std::span<const Detection> detections) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write trace " + path.string());
  write_trace(out, detections);
}

std::vector<Detection> observe(const traffic::World& world) {
  std::vector<Detection> out;
  out.reserve(world.vehicles().size());
  for (const auto& v : world.vehicles())
    out.push_back({world.clock(), v.id, Category::Car, v.lane, v.offset, v.speed});
  return out;
}

}  // namespace rbtwin::dt
