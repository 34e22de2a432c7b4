#include "svsim/scenario_file.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "svsim/topo_file.hpp"

namespace svsim {

ParseError::ParseError(int line, int column, const std::string& what)
    : Error("line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + what),
      line_(line),
      column_(column),
      detail_(what) {}

const Value* Section::find(std::string_view key) const {
  for (const auto& e : entries) {
    if (e.key == key) return &e.value;
  }
  return nullptr;
}

const Section* Document::find(std::string_view name) const {
  for (const auto& s : sections) {
    if (s.name == name) return &s;
  }
  return nullptr;
}

namespace {

bool is_bare(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
}

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  Document run() {
    Document doc;
    std::set<std::string> seen_sections;
    Section* current = nullptr;
    for (;;) {
      skip_blank_lines();
      if (done()) break;
      if (peek() == '[') {
        const int line = line_;
        const int col = col_;
        advance();
        skip_spaces();
        std::string name;
        while (!done() && (is_bare(peek()) || peek() == '.')) name += advance();
        skip_spaces();
        if (name.empty()) error("expected section name");
        if (done() || peek() != ']') error("expected ']' after section name");
        advance();
        end_of_line();
        if (!seen_sections.insert(name).second) {
          throw ParseError(line, col, "section [" + name + "] appears twice");
        }
        doc.sections.push_back({name, line, {}});
        current = &doc.sections.back();
        continue;
      }
      const int line = line_;
      const int col = col_;
      std::string key;
      while (!done() && is_bare(peek())) key += advance();
      if (key.empty()) error(std::string("unexpected character '") + peek() + "'");
      if (!current) throw ParseError(line, col, "key '" + key + "' outside of any section");
      skip_spaces();
      if (done() || peek() != '=') error("expected '=' after key '" + key + "'");
      advance();
      skip_spaces();
      Value v = value();
      end_of_line();
      if (current->find(key)) throw ParseError(line, col, "duplicate key '" + key + "'");
      current->entries.push_back({key, std::move(v)});
    }
    return doc;
  }

 private:
  bool done() const { return pos_ >= text_.size(); }
  char peek() const { return text_[pos_]; }

  char advance() {
    char c = text_[pos_++];
    if (c == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    return c;
  }

  [[noreturn]] void error(const std::string& what) const { throw ParseError(line_, col_, what); }

  void skip_spaces() {
    while (!done() && (peek() == ' ' || peek() == '\t' || peek() == '\r')) advance();
  }

  void skip_comment() {
    if (!done() && peek() == '#') {
      while (!done() && peek() != '\n') advance();
    }
  }

  void skip_blank_lines() {
    for (;;) {
      skip_spaces();
      skip_comment();
      if (!done() && peek() == '\n') {
        advance();
        continue;
      }
      return;
    }
  }

  void end_of_line() {
    skip_spaces();
    skip_comment();
    if (done()) return;
    if (peek() != '\n') error(std::string("unexpected trailing character '") + peek() + "'");
    advance();
  }

  Value value() {
    if (done()) error("expected a value");
    Value v;
    v.line = line_;
    v.column = col_;
    const char c = peek();
    if (c == '"') {
      v.kind = Value::Kind::kString;
      v.text = string_literal();
    } else if (c == '[') {
      v.kind = Value::Kind::kArray;
      advance();
      for (;;) {
        skip_blank_lines();
        if (done()) error("unterminated array");
        if (peek() == ']') {
          advance();
          break;
        }
        v.items.push_back(value());
        skip_blank_lines();
        if (done()) error("unterminated array");
        if (peek() == ',') {
          advance();
        } else if (peek() != ']') {
          error("expected ',' or ']' in array");
        }
      }
    } else if (text_.substr(pos_, 4) == "true") {
      v.kind = Value::Kind::kBool;
      v.boolean = true;
      for (int i = 0; i < 4; ++i) advance();
    } else if (text_.substr(pos_, 5) == "false") {
      v.kind = Value::Kind::kBool;
      for (int i = 0; i < 5; ++i) advance();
    } else if (c == '+' || c == '-' || c == '.' || std::isdigit(static_cast<unsigned char>(c))) {
      number(v);
    } else {
      error(std::string("unexpected character '") + c + "' where a value was expected");
    }
    return v;
  }

  std::string string_literal() {
    advance();  // opening quote
    std::string out;
    for (;;) {
      if (done() || peek() == '\n') error("unterminated string");
      char c = advance();
      if (c == '"') return out;
      if (c == '\\') {
        if (done()) error("unterminated string");
        char e = advance();
        switch (e) {
          case 'n': out += '\n'; break;
          case 't': out += '\t'; break;
          case '"': out += '"'; break;
          case '\\': out += '\\'; break;
          default: error(std::string("unknown escape '\\") + e + "'");
        }
      } else {
        out += c;
      }
    }
  }

  void number(Value& v) {
    std::string digits;
    bool integral = true;
    while (!done()) {
      char c = peek();
      if (std::isdigit(static_cast<unsigned char>(c)) || c == '+' || c == '-') {
        digits += c;
      } else if (c == '.' || c == 'e' || c == 'E') {
        integral = false;
        digits += c;
      } else if (c != '_') {
        break;
      }
      advance();
    }
    std::size_t used = 0;
    double parsed = 0.0;
    try {
      parsed = std::stod(digits, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != digits.size() || !std::isfinite(parsed)) {
      throw ParseError(v.line, v.column, "malformed number '" + digits + "'");
    }
    v.kind = Value::Kind::kNumber;
    v.number = parsed;
    v.integral = integral;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
};

// Typed, checked access to one section. Every key must be consumed,
// anything left over is reported as unknown.
class Reader {
 public:
  explicit Reader(const Section& s) : section_(s) {}

  const Value* get(std::string_view key) {
    used_.insert(std::string(key));
    return section_.find(key);
  }

  double number(std::string_view key, double fallback) {
    const Value* v = get(key);
    return v ? as_number(*v, key) : fallback;
  }

  double required_number(std::string_view key) {
    const Value* v = get(key);
    if (!v) missing(key);
    return as_number(*v, key);
  }

  std::int64_t integer(std::string_view key, std::int64_t fallback) {
    const Value* v = get(key);
    return v ? as_integer(*v, key) : fallback;
  }

  std::int64_t required_integer(std::string_view key) {
    const Value* v = get(key);
    if (!v) missing(key);
    return as_integer(*v, key);
  }

  std::string string(std::string_view key, const std::string& fallback) {
    const Value* v = get(key);
    return v ? as_string(*v, key) : fallback;
  }

  std::string required_string(std::string_view key) {
    const Value* v = get(key);
    if (!v) missing(key);
    return as_string(*v, key);
  }

  const std::vector<Value>* array(std::string_view key) {
    const Value* v = get(key);
    if (!v) return nullptr;
    if (v->kind != Value::Kind::kArray) bad(*v, key, "an array");
    return &v->items;
  }

  [[noreturn]] void missing(std::string_view key) const {
    throw ParseError(section_.line, 1,
                     "[" + section_.name + "] is missing required key '" + std::string(key) + "'");
  }

  [[noreturn]] void bad(const Value& v, std::string_view key, const char* expected) const {
    throw ParseError(v.line, v.column,
                     "[" + section_.name + "] key '" + std::string(key) + "' must be " + expected);
  }

  double as_number(const Value& v, std::string_view key) const {
    if (v.kind != Value::Kind::kNumber) bad(v, key, "a number");
    return v.number;
  }

  std::int64_t as_integer(const Value& v, std::string_view key) const {
    if (v.kind != Value::Kind::kNumber || !v.integral) bad(v, key, "an integer");
    return static_cast<std::int64_t>(std::llround(v.number));
  }

  std::string as_string(const Value& v, std::string_view key) const {
    if (v.kind != Value::Kind::kString) bad(v, key, "a string");
    return v.text;
  }

  std::vector<double> numbers(std::string_view key) {
    std::vector<double> out;
    if (const auto* items = array(key)) {
      for (const auto& item : *items) out.push_back(as_number(item, key));
    }
    return out;
  }

  void finish() const {
    for (const auto& e : section_.entries) {
      if (!used_.count(e.key)) {
        throw ParseError(e.value.line, 1,
                         "unknown key '" + e.key + "' in [" + section_.name + "]");
      }
    }
  }

 private:
  const Section& section_;
  std::set<std::string> used_;
};

TopoFile load_base_topology(const std::string& base, const std::filesystem::path& base_dir) {
  std::filesystem::path p(base);
  if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
  if (std::filesystem::exists(p)) {
    std::ifstream in(p);
    std::ostringstream text;
    text << in.rdbuf();
    return parse_topo(text.str());
  }
  if (base == "nsfnet14" || base == "nsfnet14.topo") return parse_topo(bundled_nsfnet14_topo());
  throw Error("topology base '" + base + "' not found");
}

void read_topology(const Section& s, const std::filesystem::path& base_dir, ScenarioConfig& cfg) {
  Reader r(s);
  const double capacity = r.number("capacity_bps", 100e6);
  const double delay = r.number("propagation_delay_s", 0.001);
  const int queue = static_cast<int>(r.integer("queue_capacity", 100));

  Topology& t = cfg.topology;
  const std::string base = r.string("base", "");
  if (!base.empty()) {
    TopoFile file = load_base_topology(base, base_dir);
    t.nodes = file.nodes;
    for (const auto& l : file.links) {
      t.links.push_back({l.id, l.a, l.b, l.capacity_bps.value_or(capacity),
                         l.propagation_s.value_or(delay), l.queue_capacity.value_or(queue)});
    }
  }
  if (const auto* nodes = r.array("nodes")) {
    for (const auto& n : *nodes) t.nodes.push_back(r.as_integer(n, "nodes"));
  }
  if (const auto* links = r.array("links")) {
    for (const auto& item : *links) {
      if (item.kind != Value::Kind::kArray || item.items.size() < 3 || item.items.size() > 6) {
        r.bad(item, "links", "a list of [id, a, b, capacity_bps?, delay_s?, queue?]");
      }
      const auto& f = item.items;
      Link l{r.as_integer(f[0], "links"), r.as_integer(f[1], "links"), r.as_integer(f[2], "links"),
             capacity, delay, queue};
      if (f.size() > 3) l.capacity_bps = r.as_number(f[3], "links");
      if (f.size() > 4) l.propagation_s = r.as_number(f[4], "links");
      if (f.size() > 5) l.queue_capacity = static_cast<int>(r.as_integer(f[5], "links"));
      t.links.push_back(l);
    }
  }
  t.client = r.required_integer("client");
  t.server = r.required_integer("server");
  r.finish();
}

void read_schedule(const Section& s, ScenarioConfig& cfg) {
  Reader r(s);
  BandwidthSchedule sched;
  sched.link = r.required_integer("link");
  const auto times = r.numbers("times_s");
  const auto caps = r.numbers("capacities_bps");
  if (times.size() != caps.size()) {
    throw ParseError(s.line, 1, "[" + s.name + "] times_s and capacities_bps differ in length");
  }
  for (std::size_t i = 0; i < times.size(); ++i) sched.events.push_back({times[i], caps[i]});
  r.finish();
  cfg.schedules.push_back(std::move(sched));
}

void read_asset(const Section& s, const std::string& name, ScenarioConfig& cfg) {
  Reader r(s);
  VideoAsset a;
  a.name = name;
  const std::string variant = r.required_string("variant");
  a.frame_count = static_cast<int>(r.integer("frame_count", a.frame_count));
  a.frame_rate = r.number("frame_rate", a.frame_rate);
  a.width = static_cast<int>(r.integer("width", a.width));
  a.height = static_cast<int>(r.integer("height", a.height));

  auto tiers = [&](std::string_view key, auto&& emit) {
    const auto* items = r.array(key);
    if (!items) r.missing(key);
    for (const auto& item : *items) {
      if (item.kind != Value::Kind::kArray || item.items.size() != 3) {
        r.bad(item, key, "a list of [id, bitrate_bps, quality]");
      }
      emit(r.as_string(item.items[0], key), r.as_number(item.items[1], key),
           r.as_string(item.items[2], key));
    }
  };

  if (variant == "single-rate") {
    a.variant = AssetVariant::kSingleRate;
    a.bitrate_bps = r.required_number("bitrate_bps");
    a.quality = r.required_string("quality");
  } else if (variant == "segmented") {
    a.variant = AssetVariant::kSegmented;
    a.segment_duration_s = r.required_number("segment_duration_s");
    a.segment_count = static_cast<int>(r.required_integer("segment_count"));
    tiers("representations", [&](std::string id, double bps, std::string q) {
      a.representations.push_back({std::move(id), bps, std::move(q)});
    });
  } else if (variant == "layered") {
    a.variant = AssetVariant::kLayered;
    tiers("layers", [&](std::string id, double bps, std::string q) {
      a.layers.push_back({std::move(id), bps, std::move(q)});
    });
  } else {
    r.bad(*r.get("variant"), "variant", "one of single-rate, segmented, layered");
  }
  r.finish();
  cfg.assets.push_back(std::move(a));
}

void read_transport(const Section& s, TransportOptions& t) {
  Reader r(s);
  t.mtu_bytes = static_cast<int>(r.integer("mtu_bytes", t.mtu_bytes));
  t.rto_s = r.number("rto_s", t.rto_s);
  t.startup_buffer_s = r.number("startup_buffer_s", t.startup_buffer_s);
  t.window_packets = static_cast<int>(r.integer("window_packets", t.window_packets));
  r.finish();
}

void read_abr(const Section& s, AbrOptions& a) {
  Reader r(s);
  a.ewma_alpha = r.number("ewma_alpha", a.ewma_alpha);
  a.safety_factor = r.number("safety_factor", a.safety_factor);
  a.feedback_interval_s = r.number("feedback_interval_s", a.feedback_interval_s);
  r.finish();
}

void read_rd_table(const Section& s, RateDistortionTable& rd) {
  Reader r(s);
  rd.floor_db = r.number("floor_db", rd.floor_db);
  rd.cap_db = r.number("cap_db", rd.cap_db);
  rd.nominal_db.clear();
  for (const auto& e : s.entries) {
    if (e.key == "floor_db" || e.key == "cap_db") continue;
    rd.nominal_db[e.key] = r.number(e.key, 0.0);
  }
}

void read_run(const Section& s, RunOptions& run) {
  Reader r(s);
  run.duration_s = r.number("duration_s", run.duration_s);
  run.replications = static_cast<int>(r.integer("replications", run.replications));
  const std::int64_t seed = r.integer("seed", static_cast<std::int64_t>(run.seed));
  if (seed < 0) r.bad(*r.get("seed"), "seed", "a non-negative integer");
  run.seed = static_cast<std::uint64_t>(seed);
  run.start_s = r.number("start_s", run.start_s);
  run.start_jitter_s = r.number("start_jitter_s", run.start_jitter_s);
  run.throughput_bin_s = r.number("throughput_bin_s", run.throughput_bin_s);
  if (r.get("diff_map_frame")) {
    run.diff_map_frame = static_cast<int>(r.integer("diff_map_frame", 0));
  }
  r.finish();
}

RateDistortionTable default_rd_table() {
  RateDistortionTable rd;
  rd.nominal_db = {{"crf20", 38.0}, {"crf30", 33.0}, {"crf40", 28.0}};
  return rd;
}

}  // namespace

Document parse_document(std::string_view text) { return Parser(text).run(); }

ScenarioConfig scenario_from_text(std::string_view text, const std::filesystem::path& base_dir) {
  const Document doc = parse_document(text);
  ScenarioConfig cfg;
  cfg.rd_table = default_rd_table();

  const Section* topo = doc.find("topology");
  if (!topo) throw ParseError(1, 1, "missing required section [topology]");

  for (const auto& s : doc.sections) {
    const std::string& n = s.name;
    if (n == "topology") {
      read_topology(s, base_dir, cfg);
    } else if (n == "schedule" || n.rfind("schedule.", 0) == 0) {
      read_schedule(s, cfg);
    } else if (n.rfind("asset.", 0) == 0 && n.size() > 6) {
      read_asset(s, n.substr(6), cfg);
    } else if (n == "transport") {
      read_transport(s, cfg.transport);
    } else if (n == "abr") {
      read_abr(s, cfg.abr);
    } else if (n == "rd_table") {
      read_rd_table(s, cfg.rd_table);
    } else if (n == "run") {
      read_run(s, cfg.run);
    } else if (n == "scenario") {
      Reader r(s);
      cfg.name = r.string("name", "");
      r.finish();
    } else {
      throw ParseError(s.line, 1, "unknown section [" + n + "]");
    }
  }
  return cfg;
}

ScenarioConfig load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open scenario file '" + path.string() + "'");
  std::ostringstream text;
  text << in.rdbuf();
  try {
    ScenarioConfig cfg = scenario_from_text(text.str(), path.parent_path());
    if (cfg.name.empty()) cfg.name = path.stem().string();
    return cfg;
  } catch (const ParseError& e) {
    throw ParseError(e.line(), e.column(), path.string() + ": " + e.detail());
  }
}

}  // namespace svsim
