#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "rbtwin/traffic/world.hpp"

namespace rbtwin::dt {

enum class Category : std::uint8_t { Car, Truck, Bus, Unknown };

std::string_view to_string(Category c) noexcept;
std::optional<Category> parse_category(std::string_view s) noexcept;

/// One observation of a tracked road user.
struct Detection {
  double timestamp = 0.0;
  std::uint64_t track_id = 0;
  Category category = Category::Car;
  traffic::LaneId lane = traffic::LaneId::NorthIn;
  double offset = 0.0;
  double speed = 0.0;

  friend bool operator==(const Detection&, const Detection&) = default;
};

inline constexpr std::string_view kTraceHeader = "timestamp_s,track_id,category,lane,offset_m,speed_mps";

class TraceError : public std::runtime_error {
 public:
  TraceError(std::size_t line, const std::string& message)
      : std::runtime_error("line " + std::to_string(line) + ": " + message), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Reads a detection trace. The header row is mandatory.
std::vector<Detection> read_trace(std::istream& in);
std::vector<Detection> load_trace(const std::filesystem::path& path);
void write_trace(std::ostream& out, std::span<const Detection> detections);
void save_trace(const std::filesystem::path& path, std::span<const Detection> detections);

/// Detections of every vehicle currently in `world`, stamped with its clock.
/// Track ids are vehicle ids.
std::vector<Detection> observe(const traffic::World& world);

}  // namespace rbtwin::dt
