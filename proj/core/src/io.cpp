#include "hall_edge_lab/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace hel {

std::string format_double17(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

uint64_t fnv1a64(const std::string& data) {
  uint64_t h = 1469598103934665603ull;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

JsonValue& JsonValue::set(const std::string& key, JsonValue val) {
  auto& obj = std::get<Object>(v_);
  obj.emplace_back(key, std::move(val));
  return *this;
}

JsonValue& JsonValue::push(JsonValue val) {
  auto& arr = std::get<Array>(v_);
  arr.push_back(std::move(val));
  return *this;
}

namespace {
void write_escaped(std::string& out, const std::string& s) {
  out += '"';
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      default: out += c;
    }
  }
  out += '"';
}
}  // namespace

void JsonValue::write(std::string& out, int indent, int depth) const {
  const std::string pad(indent * depth, ' ');
  const std::string padin(indent * (depth + 1), ' ');
  const char* nl = indent > 0 ? "\n" : "";
  if (std::holds_alternative<std::nullptr_t>(v_)) {
    out += "null";
  } else if (std::holds_alternative<bool>(v_)) {
    out += std::get<bool>(v_) ? "true" : "false";
  } else if (std::holds_alternative<long long>(v_)) {
    out += std::to_string(std::get<long long>(v_));
  } else if (std::holds_alternative<double>(v_)) {
    out += format_double17(std::get<double>(v_));
  } else if (std::holds_alternative<std::string>(v_)) {
    write_escaped(out, std::get<std::string>(v_));
  } else if (std::holds_alternative<Array>(v_)) {
    const auto& arr = std::get<Array>(v_);
    if (arr.empty()) {
      out += "[]";
      return;
    }
    out += "[";
    out += nl;
    for (std::size_t i = 0; i < arr.size(); ++i) {
      if (indent) out += padin;
      arr[i].write(out, indent, depth + 1);
      if (i + 1 < arr.size()) out += ",";
      out += nl;
    }
    if (indent) out += pad;
    out += "]";
  } else {
    const auto& obj = std::get<Object>(v_);
    if (obj.empty()) {
      out += "{}";
      return;
    }
    out += "{";
    out += nl;
    for (std::size_t i = 0; i < obj.size(); ++i) {
      if (indent) out += padin;
      write_escaped(out, obj[i].first);
      out += indent ? ": " : ":";
      obj[i].second.write(out, indent, depth + 1);
      if (i + 1 < obj.size()) out += ",";
      out += nl;
    }
    if (indent) out += pad;
    out += "}";
  }
}

std::string JsonValue::dump(int indent) const {
  std::string out;
  write(out, indent, 0);
  return out;
}

namespace {

using nlohmann::json;

void reject_unknown(const json& j, const std::vector<std::string>& allowed,
                    const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const auto& k : allowed)
      if (it.key() == k) ok = true;
    if (!ok)
      throw ConfigError("unknown key '" + it.key() + "' in " + where);
  }
}

const std::vector<std::string> kKnownTasks = {
    "bands", "edge",    "chern",  "correlators", "transport",
    "ward",  "refmodel", "rgflow", "rgtrees",     "ed-check"};

}  // namespace

RunConfig parse_config_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  RunConfig cfg;
  reject_unknown(j, {"model", "task", "params", "out", "workers", "seed"},
                 "config root");
  if (!j.contains("task") || !j["task"].is_string())
    throw ConfigError("config needs a string 'task'");
  cfg.task = j["task"].get<std::string>();
  bool known = false;
  for (const auto& t : kKnownTasks)
    if (cfg.task == t) known = true;
  if (!known) throw ConfigError("unknown task '" + cfg.task + "'");

  if (j.contains("model")) {
    const json& m = j["model"];
    reject_unknown(m,
                   {"model", "t1", "t2", "phi", "W", "mu", "L", "spinful",
                    "boundary", "M", "hoppings", "interaction"},
                   "model block");
    cfg.model_kind = m.value("model", "haldane");
    if (cfg.model_kind != "haldane" && cfg.model_kind != "custom")
      throw ConfigError("model must be 'haldane' or 'custom'");
    cfg.haldane.t1 = m.value("t1", 1.0);
    cfg.haldane.t2 = m.value("t2", 0.0);
    cfg.haldane.phi = m.value("phi", 0.0);
    cfg.haldane.W = m.value("W", 0.0);
    cfg.L = m.value("L", 16);
    cfg.mu = m.value("mu", 0.0);
    cfg.spinful = m.value("spinful", false);
    const std::string b = m.value("boundary", "cylinder");
    if (b == "cylinder" || b == "cylinder-dirichlet")
      cfg.boundary = Boundary::CylinderDirichlet;
    else if (b == "torus")
      cfg.boundary = Boundary::Torus;
    else
      throw ConfigError("boundary must be 'torus' or 'cylinder'");
    if (cfg.model_kind == "custom") {
      if (!m.contains("M") || !m.contains("hoppings"))
        throw ConfigError("custom model needs 'M' and 'hoppings'");
      cfg.custom_M = m["M"].get<int>();
      for (const json& h : m["hoppings"]) {
        reject_unknown(h, {"z1", "x2_offset", "r", "rp", "re", "im"},
                       "hopping record");
        cfg.custom_hoppings.push_back(
            {h.value("z1", 0), h.value("x2_offset", 0), h.value("r", 0),
             h.value("rp", 0), cplx(h.value("re", 0.0), h.value("im", 0.0))});
      }
    }
    if (m.contains("interaction")) {
      const json& w = m["interaction"];
      reject_unknown(w, {"type", "U", "records"}, "interaction block");
      const std::string type = w.value("type", "onsite");
      const int M = cfg.model_kind == "haldane" ? (cfg.spinful ? 4 : 2)
                                                : cfg.custom_M;
      if (type == "onsite")
        cfg.interaction = onsite_interaction(M, w.value("U", 1.0), cfg.spinful);
      else if (type == "nn")
        cfg.interaction = nn_interaction(M, w.value("U", 1.0), cfg.spinful);
      else if (type == "records") {
        for (const json& rec : w["records"]) {
          reject_unknown(rec, {"z1", "x2_offset", "r", "rp", "w"},
                         "interaction record");
          cfg.interaction.push_back({rec.value("z1", 0),
                                     rec.value("x2_offset", 0),
                                     rec.value("r", 0), rec.value("rp", 0),
                                     rec.value("w", 0.0)});
        }
      } else {
        throw ConfigError("interaction type must be onsite|nn|records");
      }
    }
  }
  cfg.out_dir = j.value("out", ".");
  cfg.workers = j.value("workers", 0);
  cfg.seed = j.value("seed", 0LL);
  if (j.contains("params")) {
    for (auto it = j["params"].begin(); it != j["params"].end(); ++it) {
      if (it.value().is_number())
        cfg.params[it.key()] = it.value().get<double>();
      else if (it.value().is_string())
        cfg.sparams[it.key()] = it.value().get<std::string>();
      else if (it.value().is_array()) {
        int idx = 0;
        for (const json& el : it.value())
          cfg.params[it.key() + "." + std::to_string(idx++)] =
              el.get<double>();
        cfg.params[it.key() + ".n"] = idx;
      } else {
        throw ConfigError("param '" + it.key() +
                          "' must be a number, string or array");
      }
    }
  }
  // canonical serialization for hashing: sorted-key dump of the parsed doc
  cfg.canonical = j.dump();
  cfg.config_hash = fnv1a64(cfg.canonical);
  return cfg;
}

RunConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

LatticeModel model_from_config(const RunConfig& cfg) {
  if (cfg.model_kind == "haldane") {
    auto m = build_haldane(cfg.haldane, cfg.L, cfg.mu, cfg.spinful,
                           cfg.boundary);
    if (!cfg.interaction.empty()) m = m.with_interaction(cfg.interaction);
    return m;
  }
  return build_custom(cfg.custom_M, cfg.L, cfg.mu, cfg.spinful, cfg.boundary,
                      cfg.custom_hoppings, cfg.interaction);
}

namespace {
std::string hash_hex(uint64_t h) {
  char buf[24];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(h));
  return buf;
}
}  // namespace

void write_json_artifact(
    const std::string& path, const RunConfig& cfg, JsonValue data,
    const std::vector<std::pair<std::string, std::string>>& extra_meta) {
  JsonValue meta = JsonValue::object();
  meta.set("version", kVersion);
  meta.set("config_hash", hash_hex(cfg.config_hash));
  meta.set("task", cfg.task);
  for (const auto& [k, v] : extra_meta) meta.set(k, v);
  JsonValue root = JsonValue::object();
  root.set("meta", std::move(meta));
  root.set("data", std::move(data));
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write artifact " + path);
  out << root.dump(2) << "\n";
}

CsvWriter::CsvWriter(const std::string& path, const RunConfig& cfg,
                     const std::vector<std::string>& columns)
    : path_(path) {
  buffer_ += "# version=" + std::string(kVersion) +
             " config_hash=" + hash_hex(cfg.config_hash) +
             " task=" + cfg.task + "\n";
  for (std::size_t i = 0; i < columns.size(); ++i) {
    buffer_ += columns[i];
    buffer_ += i + 1 < columns.size() ? "," : "\n";
  }
}

void CsvWriter::row(const std::vector<double>& values) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    buffer_ += format_double17(values[i]);
    buffer_ += i + 1 < values.size() ? "," : "\n";
  }
}

void CsvWriter::row_mixed(const std::vector<std::string>& values) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    buffer_ += values[i];
    buffer_ += i + 1 < values.size() ? "," : "\n";
  }
}

CsvWriter::~CsvWriter() {
  std::ofstream out(path_, std::ios::binary);
  if (out) out << buffer_;
}

}  // namespace hel
