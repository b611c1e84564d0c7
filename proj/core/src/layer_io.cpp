#include <fstream>
#include <sstream>
#include <string>
#include <unistd.h>

#include <json.hpp>

#include "number_format.hpp"
#include "ustrack/annotstore.hpp"
#include "ustrack/error.hpp"

namespace ustrack {

namespace fs = std::filesystem;
using detail::shortest;

namespace {

std::string quoted(const std::string& s) { return nlohmann::json(s).dump(); }

int parse_frame_key(const std::string& key, const std::string& label) {
  const bool digits = !key.empty() && key.size() <= 9 &&
                      key.find_first_not_of("0123456789") == std::string::npos;
  if (!digits) throw ParseError("label '" + label + "': frame key '" + key + "' is not a frame index");
  return std::stoi(key);
}

}  // namespace

void validate_layer(const AnnotationLayer& layer, const std::optional<FrameBounds>& bounds) {
  if (layer.name.empty()) throw ValidationError("layer name must be non-empty");
  for (const auto& [id, traj] : layer.labels) {
    for (const auto& [f, p] : traj) {
      const std::string where = "label '" + id + "', frame " + std::to_string(f);
      if (f < 0) throw ValidationError(where + ": negative frame index");
      if (!is_finite(p)) throw ValidationError(where + ": non-finite point");
      if (bounds) {
        if (!bounds->contains_frame(f)) {
          throw ValidationError(where + ": frame outside [0, " + std::to_string(bounds->count - 1) + "]");
        }
        if (!bounds->contains(p)) {
          throw ValidationError(where + ": point (" + shortest(p.x) + ", " + shortest(p.y) +
                                ") outside the " + std::to_string(bounds->width) + "x" +
                                std::to_string(bounds->height) + " frame");
        }
      }
    }
  }
}

std::string serialize_layer(const AnnotationLayer& layer) {
  validate_layer(layer, std::nullopt);
  std::string out;
  out += "{\n  \"schema\": " + quoted(kLayerSchema) + ",\n";
  out += "  \"layer\": " + quoted(layer.name) + ",\n";
  out += "  \"labels\": {";
  bool first_label = true;
  for (const auto& [id, traj] : layer.labels) {
    out += first_label ? "\n" : ",\n";
    first_label = false;
    out += "    " + quoted(id) + ": {";
    bool first_point = true;
    for (const auto& [f, p] : traj) {
      out += first_point ? "\n" : ",\n";
      first_point = false;
      out += "      \"" + std::to_string(f) + "\": [" + shortest(p.x) + ", " + shortest(p.y) + "]";
    }
    out += first_point ? "}" : "\n    }";
  }
  out += first_label ? "}\n}\n" : "\n  }\n}\n";
  return out;
}

AnnotationLayer parse_layer(const std::string& text, const std::optional<FrameBounds>& bounds) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(e.what());
  }
  if (!j.is_object()) throw ParseError("layer file: top level must be an object");
  if (!j.contains("schema") || !j["schema"].is_string()) {
    throw ParseError("layer file: missing string field 'schema'");
  }
  if (const auto schema = j["schema"].get<std::string>(); schema != kLayerSchema) {
    throw VersionError("layer file: unsupported schema '" + schema + "' (expected '" +
                       std::string(kLayerSchema) + "')");
  }
  if (!j.contains("layer") || !j["layer"].is_string()) {
    throw ParseError("layer file: missing string field 'layer'");
  }
  if (!j.contains("labels") || !j["labels"].is_object()) {
    throw ParseError("layer file: missing object field 'labels'");
  }

  AnnotationLayer layer;
  layer.name = j["layer"].get<std::string>();
  for (const auto& [id, frames] : j["labels"].items()) {
    if (!frames.is_object()) throw ParseError("label '" + id + "': expected an object of frames");
    Trajectory& traj = layer.labels[id];
    for (const auto& [key, xy] : frames.items()) {
      const int f = parse_frame_key(key, id);
      if (!xy.is_array() || xy.size() != 2 || !xy[0].is_number() || !xy[1].is_number()) {
        throw ParseError("label '" + id + "', frame " + key + ": expected [x, y]");
      }
      traj[f] = {xy[0].get<double>(), xy[1].get<double>()};
    }
  }
  validate_layer(layer, bounds);
  return layer;
}

void write_file_atomic(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    out.flush();
    if (!out) {
      std::error_code ec;
      fs::remove(tmp, ec);
      throw Error("cannot write " + path.string());
    }
  }
  fs::rename(tmp, path);
}

void save_layer(const AnnotationLayer& layer, const fs::path& path) {
  write_file_atomic(path, serialize_layer(layer));
}

AnnotationLayer load_layer(const fs::path& path, const std::optional<FrameBounds>& bounds) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LoadError("cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return parse_layer(buf.str(), bounds);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  } catch (const VersionError& e) {
    throw VersionError(path.string() + ": " + e.what());
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

}  // namespace ustrack
