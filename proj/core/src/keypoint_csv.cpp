#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "number_format.hpp"
#include "ustrack/annotstore.hpp"
#include "ustrack/error.hpp"

namespace ustrack {

namespace {

std::vector<std::string> split_cells(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  bool in_quotes = false;
  for (char c : line) {
    if (c == '"') {
      in_quotes = !in_quotes;
    } else if (c == ',' && !in_quotes) {
      cells.push_back(cell);
      cell.clear();
    } else if (c != '\r') {
      cell.push_back(c);
    }
  }
  cells.push_back(cell);
  return cells;
}

std::optional<double> parse_number(const std::string& cell) {
  std::string s;
  for (char c : cell) {
    if (!std::isspace(static_cast<unsigned char>(c))) s.push_back(c);
  }
  if (s.empty()) return std::nullopt;
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

// Row index cells are either integers or image paths ending in a frame
// number ("labeled-data/vid/img0042.png").
std::optional<int> parse_frame_cell(const std::string& cell) {
  std::string stem = cell;
  if (auto slash = stem.find_last_of("/\\"); slash != std::string::npos) stem = stem.substr(slash + 1);
  if (auto dot = stem.find_last_of('.'); dot != std::string::npos && dot > 0) stem = stem.substr(0, dot);
  std::size_t end = stem.size();
  std::size_t begin = end;
  while (begin > 0 && std::isdigit(static_cast<unsigned char>(stem[begin - 1]))) --begin;
  if (begin == end || end - begin > 9) return std::nullopt;
  return std::stoi(stem.substr(begin, end - begin));
}

}  // namespace

AnnotationLayer import_keypoint_csv(const std::string& text, const std::string& layer_name) {
  std::vector<std::vector<std::string>> rows;
  {
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (!line.empty()) rows.push_back(split_cells(line));
    }
  }
  std::size_t bodyparts_row = rows.size(), coords_row = rows.size();
  for (std::size_t r = 0; r < rows.size() && r < 4; ++r) {
    if (rows[r].empty()) continue;
    if (rows[r][0] == "bodyparts") bodyparts_row = r;
    if (rows[r][0] == "coords") coords_row = r;
  }
  if (bodyparts_row >= rows.size() || coords_row >= rows.size() || rows[0].empty() ||
      rows[0][0] != "scorer") {
    throw ParseError("keypoint csv: expected header rows 'scorer', 'bodyparts', 'coords'");
  }
  const auto& parts = rows[bodyparts_row];
  const auto& coords = rows[coords_row];
  if (parts.size() != coords.size()) {
    throw ParseError("keypoint csv: bodyparts and coords rows differ in length");
  }

  struct Columns {
    int x = -1, y = -1;
  };
  std::vector<std::pair<std::string, Columns>> labels;
  for (std::size_t c = 1; c < parts.size(); ++c) {
    auto it = std::find_if(labels.begin(), labels.end(),
                           [&](const auto& l) { return l.first == parts[c]; });
    if (it == labels.end()) {
      labels.push_back({parts[c], {}});
      it = std::prev(labels.end());
    }
    if (coords[c] == "x") it->second.x = static_cast<int>(c);
    if (coords[c] == "y") it->second.y = static_cast<int>(c);
  }

  AnnotationLayer layer;
  layer.name = layer_name;
  for (const auto& [id, cols] : labels) {
    if (cols.x < 0 || cols.y < 0) {
      throw ParseError("keypoint csv: label '" + id + "' lacks an x or y column");
    }
    layer.labels[id];
  }
  const std::size_t first_data = coords_row + 1;
  for (std::size_t r = first_data; r < rows.size(); ++r) {
    const auto& row = rows[r];
    const auto frame = parse_frame_cell(row.empty() ? std::string() : row[0]);
    if (!frame) {
      throw ParseError("keypoint csv: line " + std::to_string(r + 1) + ": cannot read frame index '" +
                       (row.empty() ? std::string() : row[0]) + "'");
    }
    for (const auto& [id, cols] : labels) {
      if (static_cast<std::size_t>(std::max(cols.x, cols.y)) >= row.size()) continue;
      const auto x = parse_number(row[static_cast<std::size_t>(cols.x)]);
      const auto y = parse_number(row[static_cast<std::size_t>(cols.y)]);
      if (x && y) layer.labels[id][*frame] = {*x, *y};
    }
  }
  return layer;
}

std::string export_keypoint_csv(const AnnotationLayer& layer, int frame_count) {
  int frames = frame_count;
  if (frames <= 0) {
    for (const auto& [id, traj] : layer.labels) {
      if (!traj.empty()) frames = std::max(frames, traj.rbegin()->first + 1);
    }
  }
  std::string scorer = "scorer", parts = "bodyparts", coords = "coords";
  for (const auto& [id, traj] : layer.labels) {
    scorer += "," + layer.name + "," + layer.name;
    parts += "," + id + "," + id;
    coords += ",x,y";
  }
  std::string out = scorer + "\n" + parts + "\n" + coords + "\n";
  for (int f = 0; f < frames; ++f) {
    out += std::to_string(f);
    for (const auto& [id, traj] : layer.labels) {
      if (auto it = traj.find(f); it != traj.end()) {
        out += "," + detail::shortest(it->second.x) + "," + detail::shortest(it->second.y);
      } else {
        out += ",,";
      }
    }
    out += "\n";
  }
  return out;
}

}  // namespace ustrack
