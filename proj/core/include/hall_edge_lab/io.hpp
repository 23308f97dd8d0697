#pragma once

#include <map>
#include <string>
#include <variant>
#include <vector>

#include "hall_edge_lab/lattice.hpp"
#include "hall_edge_lab/types.hpp"

namespace hel {

inline constexpr const char* kVersion = "0.1.0";

// Deterministic JSON value with ordered keys and 17-significant-digit
// number formatting, so identical runs emit byte-identical artifacts.
class JsonValue {
 public:
  using Object = std::vector<std::pair<std::string, JsonValue>>;
  using Array = std::vector<JsonValue>;

  JsonValue() : v_(nullptr) {}
  JsonValue(std::nullptr_t) : v_(nullptr) {}
  JsonValue(bool b) : v_(b) {}
  JsonValue(int i) : v_(static_cast<long long>(i)) {}
  JsonValue(long long i) : v_(i) {}
  JsonValue(double d) : v_(d) {}
  JsonValue(const char* s) : v_(std::string(s)) {}
  JsonValue(std::string s) : v_(std::move(s)) {}
  JsonValue(Array a) : v_(std::move(a)) {}
  JsonValue(Object o) : v_(std::move(o)) {}

  static JsonValue object() { return JsonValue(Object{}); }
  static JsonValue array() { return JsonValue(Array{}); }

  JsonValue& set(const std::string& key, JsonValue val);
  JsonValue& push(JsonValue val);

  std::string dump(int indent = 0) const;

 private:
  std::variant<std::nullptr_t, bool, long long, double, std::string, Array,
               Object>
      v_;
  void write(std::string& out, int indent, int depth) const;
};

std::string format_double17(double x);

// FNV-1a 64-bit over the canonical re-serialized config.
uint64_t fnv1a64(const std::string& data);

// Parsed run configuration. Unknown keys anywhere in the document are
// rejected before any compute.
struct RunConfig {
  std::string task;
  // model block
  std::string model_kind;  // "haldane" | "custom"
  HaldaneParams haldane;
  int L = 16;
  double mu = 0.0;
  bool spinful = false;
  Boundary boundary = Boundary::CylinderDirichlet;
  std::vector<HoppingRecord> custom_hoppings;
  int custom_M = 0;
  std::vector<InteractionRecord> interaction;
  // run controls
  std::string out_dir = ".";
  int workers = 0;
  long long seed = 0;
  // task-specific parameters kept as a flat key -> number/string map
  std::map<std::string, double> params;
  std::map<std::string, std::string> sparams;
  std::string canonical;   // canonical serialization (hash input)
  uint64_t config_hash = 0;
};

RunConfig parse_config_file(const std::string& path);
RunConfig parse_config_text(const std::string& text);

LatticeModel model_from_config(const RunConfig& cfg);

// Artifact writers; every file carries version + config hash metadata.
void write_json_artifact(const std::string& path, const RunConfig& cfg,
                         JsonValue data,
                         const std::vector<std::pair<std::string, std::string>>&
                             extra_meta = {});

class CsvWriter {
 public:
  CsvWriter(const std::string& path, const RunConfig& cfg,
            const std::vector<std::string>& columns);
  void row(const std::vector<double>& values);
  void row_mixed(const std::vector<std::string>& values);
  ~CsvWriter();

 private:
  std::string path_;
  std::string buffer_;
};

}  // namespace hel
