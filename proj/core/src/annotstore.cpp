#include "ustrack/annotstore.hpp"

#include <algorithm>
#include <bit>
#include <cstring>

#include "ustrack/error.hpp"

namespace ustrack {

namespace {

bool is_decimal(const std::string& s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

std::string_view strip_zeros(const std::string& s) {
  std::string_view v(s);
  while (v.size() > 1 && v.front() == '0') v.remove_prefix(1);
  return v;
}

std::string frame_str(int f) { return std::to_string(f); }

}  // namespace

bool LabelLess::operator()(const std::string& a, const std::string& b) const {
  const bool da = is_decimal(a), db = is_decimal(b);
  if (da && db) {
    const auto va = strip_zeros(a), vb = strip_zeros(b);
    if (va.size() != vb.size()) return va.size() < vb.size();
    if (va != vb) return va < vb;
    return a < b;  // "01" vs "1": keep them distinct
  }
  if (da != db) return da;
  return a < b;
}

Trajectory& label_or_throw(AnnotationLayer& layer, const std::string& label) {
  auto it = layer.labels.find(label);
  if (it == layer.labels.end()) {
    throw NotFoundError("layer '" + layer.name + "' has no label '" + label + "'");
  }
  return it->second;
}

const Trajectory& label_or_throw(const AnnotationLayer& layer, const std::string& label) {
  auto it = layer.labels.find(label);
  if (it == layer.labels.end()) {
    throw NotFoundError("layer '" + layer.name + "' has no label '" + label + "'");
  }
  return it->second;
}

void set_point(AnnotationLayer& layer, const std::string& label, int frame, Point2 p,
               const FrameBounds& bounds) {
  Trajectory& traj = label_or_throw(layer, label);
  if (!bounds.contains_frame(frame)) {
    throw ValidationError("label '" + label + "': frame " + frame_str(frame) + " outside [0, " +
                          frame_str(bounds.count - 1) + "]");
  }
  if (!bounds.contains(p)) {
    throw ValidationError("label '" + label + "', frame " + frame_str(frame) +
                          ": point outside the image");
  }
  traj[frame] = p;
}

bool remove_point(AnnotationLayer& layer, const std::string& label, int frame) {
  return label_or_throw(layer, label).erase(frame) != 0;
}

std::optional<Point2> get_point(const AnnotationLayer& layer, const std::string& label, int frame) {
  const Trajectory& traj = label_or_throw(layer, label);
  if (auto it = traj.find(frame); it != traj.end()) return it->second;
  return std::nullopt;
}

std::vector<int> annotated_frames(const AnnotationLayer& layer) {
  std::set<int> frames;
  for (const auto& [id, traj] : layer.labels) {
    for (const auto& [f, p] : traj) frames.insert(f);
  }
  return {frames.begin(), frames.end()};
}

std::vector<int> trim(AnnotationLayer& layer, const std::set<std::string, LabelLess>& expected) {
  if (expected.empty()) throw ContractError("trim: expected label set is empty");
  std::vector<int> removed;
  for (int f : annotated_frames(layer)) {
    const bool complete = std::all_of(expected.begin(), expected.end(), [&](const std::string& id) {
      auto it = layer.labels.find(id);
      return it != layer.labels.end() && it->second.count(f) != 0;
    });
    if (!complete) removed.push_back(f);
  }
  for (auto& [id, traj] : layer.labels) {
    for (int f : removed) traj.erase(f);
  }
  return removed;
}

void copy_range(const AnnotationLayer& src, AnnotationLayer& dst,
                const std::optional<std::string>& label, FrameRange range) {
  auto copy_one = [&](const std::string& id, const Trajectory& from) {
    auto it = from.lower_bound(range.first);
    if (it == from.end() || it->first > range.last) return;  // nothing to copy
    Trajectory& to = dst.labels[id];
    for (; it != from.end() && it->first <= range.last; ++it) to[it->first] = it->second;
  };
  if (label) {
    copy_one(*label, label_or_throw(src, *label));
  } else {
    for (const auto& [id, traj] : src.labels) copy_one(id, traj);
  }
}

int remove_range(AnnotationLayer& layer, const std::optional<std::string>& label, FrameRange range) {
  int removed = 0;
  auto remove_one = [&](Trajectory& traj) {
    auto lo = traj.lower_bound(range.first);
    auto hi = traj.upper_bound(range.last);
    removed += static_cast<int>(std::distance(lo, hi));
    traj.erase(lo, hi);
  };
  if (label) {
    remove_one(label_or_throw(layer, *label));
  } else {
    for (auto& [id, traj] : layer.labels) remove_one(traj);
  }
  return removed;
}

TrackedPoint guess(const FrameSequence& seq, const AnnotationLayer& layer, const std::string& label,
                   int target, const TrackConfig& cfg) {
  const Trajectory& traj = label_or_throw(layer, label);
  if (traj.empty()) {
    throw ContractError("guess: label '" + label + "' has no annotated frames");
  }
  if (target < 0 || target >= seq.count()) {
    throw ValidationError("guess: frame " + frame_str(target) + " outside the sequence");
  }
  // Nearest annotated frame; on a tie the earlier one wins.
  auto after = traj.lower_bound(target);
  auto nearest = after;
  if (after == traj.end()) {
    nearest = std::prev(after);
  } else if (after->first != target && after != traj.begin()) {
    auto before = std::prev(after);
    if (target - before->first <= after->first - target) nearest = before;
  }
  if (nearest->first == target) return {nearest->second, TrackStatus::ok, 0.0};
  const TrackSegment seg = track_range(seq, nearest->second, nearest->first, target, cfg);
  return seg.points.back();
}

int interpolate_gaps(const FrameSequence& seq, AnnotationLayer& layer,
                     const std::optional<std::string>& label, FrameRange range,
                     const RstcConfig& cfg, bool overwrite) {
  cfg.validate();
  if (range.first > range.last || range.first < 0 || range.last >= seq.count()) {
    throw ValidationError("interpolate: range [" + frame_str(range.first) + ", " +
                          frame_str(range.last) + "] outside the sequence");
  }
  std::vector<std::string> ids;
  if (label) {
    label_or_throw(layer, *label);
    ids.push_back(*label);
  } else {
    for (const auto& [id, traj] : layer.labels) ids.push_back(id);
  }

  PyramidCache cache(seq, cfg.track.levels, 64);
  int written = 0;
  int interpolated_labels = 0;
  for (const auto& id : ids) {
    Trajectory& traj = layer.labels.at(id);
    std::vector<int> anchors;
    for (auto it = traj.lower_bound(range.first); it != traj.end() && it->first <= range.last; ++it) {
      anchors.push_back(it->first);
    }
    if (anchors.size() < 2) {
      if (label) {
        throw ContractError("interpolate: label '" + id + "' needs at least 2 annotated frames in [" +
                            frame_str(range.first) + ", " + frame_str(range.last) + "]");
      }
      continue;
    }
    ++interpolated_labels;
    if (overwrite) anchors = {anchors.front(), anchors.back()};
    for (std::size_t i = 0; i + 1 < anchors.size(); ++i) {
      const int a = anchors[i], b = anchors[i + 1];
      if (b - a < 2) continue;
      const Tracklet t = rstc_tracklet(cache, a, b, traj.at(a), traj.at(b), cfg);
      for (int f = a + 1; f < b; ++f) {
        traj[f] = t.at(f);
        ++written;
      }
    }
  }
  if (interpolated_labels == 0) {
    throw ContractError("interpolate: no label has 2 annotated frames in [" + frame_str(range.first) +
                        ", " + frame_str(range.last) + "]");
  }
  return written;
}

// ---------------------------------------------------------------------------

std::vector<std::string> AnnotationStore::layer_names() const {
  std::vector<std::string> names;
  for (const auto& [name, e] : layers_) names.push_back(name);
  return names;
}

AnnotationStore::Entry& AnnotationStore::entry(const std::string& name) {
  auto it = layers_.find(name);
  if (it == layers_.end()) throw NotFoundError("unknown layer '" + name + "'");
  return it->second;
}

const AnnotationLayer& AnnotationStore::layer(const std::string& name) const {
  auto it = layers_.find(name);
  if (it == layers_.end()) throw NotFoundError("unknown layer '" + name + "'");
  return it->second.layer;
}

std::uint64_t AnnotationStore::revision(const std::string& name) const {
  auto it = layers_.find(name);
  if (it == layers_.end()) throw NotFoundError("unknown layer '" + name + "'");
  return it->second.revision;
}

void AnnotationStore::add_layer(AnnotationLayer layer) {
  if (layer.name.empty()) throw ContractError("layer name must be non-empty");
  if (has_layer(layer.name)) throw ContractError("layer '" + layer.name + "' already exists");
  put_layer(std::move(layer));
}

void AnnotationStore::put_layer(AnnotationLayer layer) {
  if (layer.name.empty()) throw ContractError("layer name must be non-empty");
  auto it = layers_.find(layer.name);
  if (it == layers_.end()) {
    push_undo(layer.name, std::nullopt);
    const std::string name = layer.name;
    layers_.emplace(name, Entry{std::move(layer), ++clock_});
  } else {
    push_undo(layer.name, it->second.layer);
    it->second.layer = std::move(layer);
    it->second.revision = ++clock_;
  }
}

void AnnotationStore::remove_layer(const std::string& name) {
  Entry& e = entry(name);
  push_undo(name, e.layer);
  layers_.erase(name);
  if (primary_ == name) primary_.reset();
  if (overlay_ == name) overlay_.reset();
}

void AnnotationStore::push_undo(const std::string& name, std::optional<AnnotationLayer> before) {
  undo_.push_back({name, std::move(before)});
  while (undo_.size() > kUndoDepth) undo_.pop_front();
}

bool AnnotationStore::undo() {
  if (undo_.empty()) return false;
  UndoRecord rec = std::move(undo_.back());
  undo_.pop_back();
  auto it = layers_.find(rec.name);
  if (!rec.before) {
    if (it != layers_.end()) layers_.erase(it);
    if (primary_ == rec.name) primary_.reset();
    if (overlay_ == rec.name) overlay_.reset();
  } else if (it == layers_.end()) {
    layers_.emplace(rec.name, Entry{std::move(*rec.before), ++clock_});
  } else {
    it->second.layer = std::move(*rec.before);
    it->second.revision = ++clock_;
  }
  return true;
}

void AnnotationStore::select_primary(std::optional<std::string> name) {
  if (name && !has_layer(*name)) throw NotFoundError("unknown layer '" + *name + "'");
  if (name && overlay_ == name) overlay_.reset();
  primary_ = std::move(name);
}

void AnnotationStore::select_overlay(std::optional<std::string> name) {
  if (name && !has_layer(*name)) throw NotFoundError("unknown layer '" + *name + "'");
  if (name && primary_ == name) {
    throw ContractError("overlay layer must differ from the primary layer");
  }
  overlay_ = std::move(name);
}

std::uint64_t AnnotationStore::content_hash() const {
  // FNV-1a over a canonical walk.
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&h](const void* data, std::size_t n) {
    const auto* bytes = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= bytes[i];
      h *= 1099511628211ULL;
    }
  };
  auto mix_str = [&](const std::string& s) {
    mix(s.data(), s.size());
    mix("\0", 1);
  };
  for (const auto& [name, e] : layers_) {
    mix_str(name);
    for (const auto& [id, traj] : e.layer.labels) {
      mix_str(id);
      for (const auto& [f, p] : traj) {
        mix(&f, sizeof f);
        const auto x = std::bit_cast<std::uint64_t>(p.x);
        const auto y = std::bit_cast<std::uint64_t>(p.y);
        mix(&x, sizeof x);
        mix(&y, sizeof y);
      }
    }
  }
  return h;
}

}  // namespace ustrack
