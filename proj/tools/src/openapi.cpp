#include <string>

#include <json.hpp>

#include "ustrack/tools/apiserver.hpp"

namespace ustrack::tools {

namespace {

using ojson = nlohmann::ordered_json;

ojson ref(const std::string& name) { return {{"$ref", "#/components/schemas/" + name}}; }

ojson json_body(const ojson& schema) {
  return {{"required", true}, {"content", {{"application/json", {{"schema", schema}}}}}};
}

ojson reply(const std::string& description, const ojson& schema = nullptr) {
  ojson r{{"description", description}};
  if (!schema.is_null()) r["content"] = {{"application/json", {{"schema", schema}}}};
  return r;
}

ojson path_param(const std::string& name, const std::string& type = "string") {
  return {{"name", name}, {"in", "path"}, {"required", true}, {"schema", {{"type", type}}}};
}

ojson errors(std::initializer_list<int> codes) {
  ojson out = ojson::object();
  for (int c : codes) {
    const char* text = c == 400   ? "Malformed JSON"
                       : c == 404 ? "Unknown layer, label, frame or job"
                       : c == 409 ? "Stale revision token"
                                  : "Validation failed";
    out[std::to_string(c)] = reply(text, ref("Error"));
  }
  return out;
}

ojson with(ojson base, const ojson& extra) {
  for (auto& [k, v] : extra.items()) base[k] = v;
  return base;
}

}  // namespace

std::string openapi_document() {
  const ojson point{{"type", "array"}, {"items", {{"type", "number"}}}, {"minItems", 2}, {"maxItems", 2}};
  const ojson range{{"type", "array"}, {"items", {{"type", "integer"}}}, {"minItems", 2}, {"maxItems", 2},
                    {"description", "Inclusive [first, last]; defaults to the whole sequence"}};
  const ojson revision{{"type", "integer"}, {"minimum", 0},
                       {"description", "Optional revision token; a mismatch yields 409. Also accepted as If-Match"}};
  const ojson label_sel{{"type", "string"}, {"description", "Label id or \"all\""}};

  ojson schemas{
      {"Error",
       {{"type", "object"},
        {"properties", {{"error", {{"type", "string"}}}, {"fields", {{"type", "object"}}}}}}},
      {"Meta",
       {{"type", "object"},
        {"properties",
         {{"frames", {{"type", "integer"}}},
          {"fps", {{"type", "number"}}},
          {"width", {{"type", "integer"}}},
          {"height", {{"type", "integer"}}},
          {"mm_per_px", point},
          {"window_frames", {{"type", "integer"}}},
          {"layers", {{"type", "array"}, {"items", {{"type", "string"}}}}}}}}},
      {"LayerSummary",
       {{"type", "object"},
        {"properties",
         {{"name", {{"type", "string"}}},
          {"revision", {{"type", "integer"}}},
          {"labels", {{"type", "array"}, {"items", {{"type", "string"}}}}},
          {"points", {{"type", "integer"}}},
          {"dirty", {{"type", "boolean"}}}}}}},
      {"Trajectory",
       {{"type", "object"},
        {"description", "Frame index (decimal string) to [x, y] in pixels"},
        {"additionalProperties", point}}},
      {"Job",
       {{"type", "object"},
        {"properties",
         {{"id", {{"type", "string"}}},
          {"state", {{"type", "string"}, {"enum", {"queued", "running", "done", "failed"}}}},
          {"progress", {{"type", "number"}}},
          {"layer", {{"type", "string"}}},
          {"result", {{"type", "string"}}},
          {"error", {{"type", "string"}}}}}}},
  };

  const ojson layer_p = path_param("layer"), label_p = path_param("label"), frame_p = path_param("frame", "integer");

  ojson paths{
      {"/api/meta", {{"get", {{"summary", "Sequence geometry and calibration"}, {"responses", {{"200", reply("OK", ref("Meta"))}}}}}}},
      {"/api/frame/{frame}",
       {{"get",
         {{"summary", "Frame as PNG"},
          {"parameters", {frame_p}},
          {"responses",
           with({{"200", {{"description", "PNG image"}, {"content", {{"image/png", ojson::object()}}}}}}, errors({404}))}}}}},
      {"/api/layers",
       {{"get",
         {{"summary", "List layers"},
          {"responses",
           {{"200", reply("OK", {{"type", "object"},
                                 {"properties", {{"layers", {{"type", "array"}, {"items", ref("LayerSummary")}}}}}})}}}}},
        {"post",
         {{"summary", "Create a layer"},
          {"requestBody",
           json_body({{"type", "object"},
                      {"required", {"name"}},
                      {"properties",
                       {{"name", {{"type", "string"}}},
                        {"labels", {{"type", "array"}, {"items", {{"type", "string"}}}}},
                        {"copy_from", {{"type", "string"}}}}}})},
          {"responses", with({{"201", reply("Created", ref("LayerSummary"))}}, errors({400, 404, 409, 422}))}}}}},
      {"/api/layers/{layer}",
       {{"get",
         {{"summary", "Whole layer"},
          {"parameters", {layer_p}},
          {"responses", with({{"200", reply("OK")}}, errors({404}))}}},
        {"delete",
         {{"summary", "Delete a layer"},
          {"parameters", {layer_p}},
          {"responses", with({{"200", reply("Deleted")}}, errors({404, 409}))}}}}},
      {"/api/layers/{layer}/labels",
       {{"post",
         {{"summary", "Declare a label"},
          {"parameters", {layer_p}},
          {"requestBody", json_body({{"type", "object"}, {"required", {"id"}}, {"properties", {{"id", {{"type", "string"}}}}}})},
          {"responses", with({{"201", reply("Created")}}, errors({404, 422}))}}}}},
      {"/api/layers/{layer}/labels/{label}",
       {{"get",
         {{"summary", "Sparse trajectory of one label"},
          {"parameters", {layer_p, label_p}},
          {"responses",
           with({{"200", reply("OK", {{"type", "object"},
                                      {"properties",
                                       {{"revision", {{"type", "integer"}}}, {"points", ref("Trajectory")}}}})}},
                errors({404}))}}}}},
      {"/api/layers/{layer}/labels/{label}/frames/{frame}",
       {{"put",
         {{"summary", "Set one point"},
          {"parameters", {layer_p, label_p, frame_p}},
          {"requestBody",
           json_body({{"type", "object"},
                      {"required", {"x", "y"}},
                      {"properties", {{"x", {{"type", "number"}}}, {"y", {{"type", "number"}}}, {"revision", revision}}}})},
          {"responses", with({{"200", reply("Stored")}}, errors({400, 404, 409, 422}))}}},
        {"delete",
         {{"summary", "Remove one point"},
          {"parameters", {layer_p, label_p, frame_p}},
          {"responses", with({{"200", reply("Removed")}}, errors({404, 409}))}}}}},
      {"/api/layers/{layer}/annotated-frames",
       {{"get",
         {{"summary", "Frames carrying any point, ascending"},
          {"parameters",
           {layer_p, {{"name", "label"}, {"in", "query"}, {"required", false}, {"schema", {{"type", "string"}}}}}},
          {"responses", with({{"200", reply("OK")}}, errors({404}))}}}}},
      {"/api/ops/guess",
       {{"post",
         {{"summary", "LK proposal from the nearest annotated frame"},
          {"requestBody",
           json_body({{"type", "object"},
                      {"required", {"layer", "label", "frame"}},
                      {"properties",
                       {{"layer", {{"type", "string"}}}, {"label", {{"type", "string"}}}, {"frame", {{"type", "integer"}}}}}})},
          {"responses", with({{"200", reply("x, y and status (ok or lost)")}}, errors({404, 422}))}}}}},
      {"/api/ops/interpolate",
       {{"post",
         {{"summary", "Fill gaps between annotated frames with LK-RSTC"},
          {"requestBody",
           json_body({{"type", "object"},
                      {"required", {"layer"}},
                      {"properties",
                       {{"layer", {{"type", "string"}}},
                        {"label", label_sel},
                        {"range", range},
                        {"overwrite", {{"type", "boolean"}}},
                        {"revision", revision}}}})},
          {"responses", with({{"200", reply("Number of points written")}}, errors({404, 409, 422}))}}}}},
      {"/api/ops/trim",
       {{"post",
         {{"summary", "Drop frames missing any expected label"},
          {"requestBody",
           json_body({{"type", "object"},
                      {"required", {"layer"}},
                      {"properties",
                       {{"layer", {{"type", "string"}}},
                        {"expected", {{"type", "array"}, {"items", {{"type", "string"}}}}},
                        {"revision", revision}}}})},
          {"responses", with({{"200", reply("Removed frames")}}, errors({404, 409, 422}))}}}}},
      {"/api/ops/copy",
       {{"post",
         {{"summary", "Copy points between layers"},
          {"requestBody",
           json_body({{"type", "object"},
                      {"required", {"src", "dst"}},
                      {"properties",
                       {{"src", {{"type", "string"}}},
                        {"dst", {{"type", "string"}}},
                        {"label", label_sel},
                        {"range", range},
                        {"revision", revision}}}})},
          {"responses", with({{"200", reply("Copied")}}, errors({404, 409, 422}))}}}}},
      {"/api/ops/filter",
       {{"post",
         {{"summary", "Start a jitter-filter job; output layer is <layer>_lkrstc"},
          {"requestBody",
           json_body({{"type", "object"},
                      {"required", {"layer"}},
                      {"properties",
                       {{"layer", {{"type", "string"}}},
                        {"window", {{"type", "integer"}, {"minimum", 3}}},
                        {"window_seconds", {{"type", "number"}}},
                        {"alpha", {{"type", "number"}}}}}})},
          {"responses", with({{"202", reply("Job accepted")}}, errors({404, 422}))}}}}},
      {"/api/jobs/{id}",
       {{"get",
         {{"summary", "Job state and progress"},
          {"parameters", {path_param("id")}},
          {"responses", with({{"200", reply("OK", ref("Job"))}}, errors({404}))}}}}},
      {"/api/save",
       {{"post",
         {{"summary", "Write a layer to <layers-dir>/<layer>.annot.json"},
          {"requestBody", json_body({{"type", "object"}, {"required", {"layer"}}, {"properties", {{"layer", {{"type", "string"}}}}}})},
          {"responses", with({{"200", reply("File path")}}, errors({404}))}}}}},
      {"/api/undo", {{"post", {{"summary", "Revert the latest mutation"}, {"responses", {{"200", reply("undone flag")}}}}}}},
      {"/api/selection",
       {{"get", {{"summary", "Primary/overlay layer, current label and frame"}, {"responses", {{"200", reply("OK")}}}}},
        {"put",
         {{"summary", "Update the selection"},
          {"requestBody",
           json_body({{"type", "object"},
                      {"properties",
                       {{"primary", {{"type", {"string", "null"}}}},
                        {"overlay", {{"type", {"string", "null"}}}},
                        {"label", {{"type", "string"}}},
                        {"frame", {{"type", "integer"}}}}}})},
          {"responses", with({{"204", reply("Updated")}}, errors({404, 422}))}}}}},
  };

  const ojson doc{
      {"openapi", "3.0.3"},
      {"info", {{"title", "ustrack annotation service"}, {"version", "1.0.0"}}},
      {"servers", {{{"url", "http://127.0.0.1:" + std::to_string(kDefaultPort)}}}},
      {"paths", paths},
      {"components", {{"schemas", schemas}}},
  };
  return doc.dump(2) + "\n";
}

}  // namespace ustrack::tools
