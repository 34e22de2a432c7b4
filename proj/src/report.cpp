#include "svsim/report.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace svsim {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

// Parses a rendered number back so the json value is exactly the csv value.
double as_json_number(const std::string& rendered) { return std::stod(rendered); }

class OutFile {
 public:
  explicit OutFile(const fs::path& path) : path_(path), out_(path, std::ios::binary) {
    if (!out_) throw Error("cannot open " + path.string() + " for writing");
  }
  std::ofstream& stream() { return out_; }
  fs::path close() {
    out_.close();
    if (!out_) throw Error("write failed: " + path_.string());
    return path_;
  }

 private:
  fs::path path_;
  std::ofstream out_;
};

std::string run_label(const RunResult& r) { return r.method + "#" + std::to_string(r.replication); }

struct SummaryRow {
  std::string method;
  std::string values[7];
};

SummaryRow summary_row(const MethodSummary& s) {
  const MethodMetrics& m = s.mean;
  return {s.method,
          {format_number(m.mean_psnr_db), format_number(m.mean_throughput_bps),
           format_number(m.mean_delay_s), format_number(m.sent), format_number(m.received),
           format_number(m.lost), format_number(m.loss_pct)}};
}

constexpr const char* kSummaryColumns[] = {"mean_psnr_db", "mean_throughput_bps", "mean_delay_s",
                                           "sent",         "received",            "lost",
                                           "loss_pct"};

ordered_json metrics_json(const MethodMetrics& m) {
  ordered_json j;
  const double v[] = {m.mean_psnr_db, m.mean_throughput_bps, m.mean_delay_s, m.sent,
                      m.received,     m.lost,                m.loss_pct};
  for (std::size_t i = 0; i < 7; ++i) j[kSummaryColumns[i]] = as_json_number(format_number(v[i]));
  return j;
}

fs::path write_csv(const RunReport& report, const fs::path& dir) {
  OutFile f(dir / "summary.csv");
  auto& out = f.stream();
  out << "method";
  for (const char* c : kSummaryColumns) out << ',' << c;
  out << '\n';
  for (const auto& s : report.methods) {
    const auto row = summary_row(s);
    out << csv_field(row.method);
    for (const auto& v : row.values) out << ',' << v;
    out << '\n';
  }
  return f.close();
}

fs::path write_psnr_csv(const RunReport& report, const fs::path& dir) {
  OutFile f(dir / "psnr_per_frame.csv");
  auto& out = f.stream();
  out << "frame,method,psnr_db\n";
  for (const auto& s : report.methods) {
    for (std::size_t i = 0; i < s.mean_psnr_per_frame.size(); ++i) {
      out << i << ',' << csv_field(s.method) << ',' << format_number(s.mean_psnr_per_frame[i])
          << '\n';
    }
  }
  return f.close();
}

fs::path write_throughput_csv(const RunReport& report, const fs::path& dir) {
  OutFile f(dir / "throughput.csv");
  auto& out = f.stream();
  out << "bin_start,method,bps\n";
  for (const auto& s : report.methods) {
    for (std::size_t i = 0; i < s.mean_throughput_bps.size(); ++i) {
      out << format_number(static_cast<double>(i) * report.throughput_bin_s) << ','
          << csv_field(s.method) << ',' << format_number(s.mean_throughput_bps[i]) << '\n';
    }
  }
  return f.close();
}

fs::path write_events_csv(const RunReport& report, const fs::path& dir) {
  OutFile f(dir / "events.csv");
  auto& out = f.stream();
  out << "time,flow,event,detail\n";
  for (const auto& runs : report.runs) {
    for (const auto& r : runs) {
      const auto label = run_label(r);
      for (const auto& e : r.events) {
        out << format_seconds(e.time) << ',' << csv_field(label) << ',' << csv_field(e.event) << ','
            << csv_field(e.detail) << '\n';
      }
    }
  }
  return f.close();
}

fs::path write_summary_jsonl(const RunReport& report, const fs::path& dir) {
  OutFile f(dir / "summary.jsonl");
  auto& out = f.stream();
  for (std::size_t m = 0; m < report.methods.size(); ++m) {
    const auto& s = report.methods[m];
    ordered_json j;
    j["method"] = s.method;
    j.update(metrics_json(s.mean));
    j["stddev"] = metrics_json(s.stddev);
    ordered_json runs = ordered_json::array();
    for (const auto& r : report.runs[m]) {
      ordered_json rj;
      rj["run"] = r.replication;
      rj["seed"] = r.seed;
      rj.update(metrics_json(r.metrics));
      runs.push_back(rj);
    }
    j["runs"] = runs;
    j["fingerprint"] = report.fingerprint;
    out << j.dump() << '\n';
  }
  return f.close();
}

fs::path write_psnr_jsonl(const RunReport& report, const fs::path& dir) {
  OutFile f(dir / "psnr_per_frame.jsonl");
  auto& out = f.stream();
  for (const auto& s : report.methods) {
    for (std::size_t i = 0; i < s.mean_psnr_per_frame.size(); ++i) {
      ordered_json j;
      j["frame"] = i;
      j["method"] = s.method;
      j["psnr_db"] = as_json_number(format_number(s.mean_psnr_per_frame[i]));
      out << j.dump() << '\n';
    }
  }
  return f.close();
}

fs::path write_throughput_jsonl(const RunReport& report, const fs::path& dir) {
  OutFile f(dir / "throughput.jsonl");
  auto& out = f.stream();
  for (const auto& s : report.methods) {
    for (std::size_t i = 0; i < s.mean_throughput_bps.size(); ++i) {
      ordered_json j;
      j["bin_start"] =
          as_json_number(format_number(static_cast<double>(i) * report.throughput_bin_s));
      j["method"] = s.method;
      j["bps"] = as_json_number(format_number(s.mean_throughput_bps[i]));
      out << j.dump() << '\n';
    }
  }
  return f.close();
}

fs::path write_events_jsonl(const RunReport& report, const fs::path& dir) {
  OutFile f(dir / "events.jsonl");
  auto& out = f.stream();
  for (const auto& runs : report.runs) {
    for (const auto& r : runs) {
      const auto label = run_label(r);
      for (const auto& e : r.events) {
        ordered_json j;
        j["time"] = as_json_number(format_seconds(e.time));
        j["flow"] = label;
        j["event"] = e.event;
        j["detail"] = e.detail;
        out << j.dump() << '\n';
      }
    }
  }
  return f.close();
}

fs::path write_diff_map(const RunReport& report, const fs::path& dir) {
  OutFile f(dir / "diff_map.txt");
  auto& out = f.stream();
  for (std::size_t m = 0; m < report.methods.size(); ++m) out << render_diff_map(report, m);
  return f.close();
}

std::uint64_t name_seed(const std::string& s, int frame) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h ^ static_cast<std::uint64_t>(frame);
}

}  // namespace

ReportFormat parse_report_format(const std::string& name) {
  if (name == "csv") return ReportFormat::kCsv;
  if (name == "jsonl" || name == "json-lines") return ReportFormat::kJsonLines;
  throw Error("unknown report format '" + name + "' (expected csv or jsonl)");
}

std::string format_number(double v) {
  if (v == 0.0) return "0";  // also folds -0
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::string format_seconds(TimeNs t) {
  char buf[40];
  const char* sign = t < 0 ? "-" : "";
  const std::int64_t a = t < 0 ? -t : t;
  std::snprintf(buf, sizeof buf, "%s%" PRId64 ".%09" PRId64, sign, a / kNsPerSecond,
                a % kNsPerSecond);
  return buf;
}

std::string render_diff_map(const RunReport& report, std::size_t method) {
  const auto& s = report.methods.at(method);
  const auto& runs = report.runs.at(method);
  const int frame = report.diff_map_frame.value_or(0);
  std::ostringstream out;
  if (runs.empty() || frame < 0 ||
      static_cast<std::size_t>(frame) >= runs.front().ledger.psnr_db.size()) {
    out << "# method=" << s.method << " frame=" << frame << " unavailable\n";
    return out.str();
  }
  const double target = runs.front().ledger.psnr_db[static_cast<std::size_t>(frame)];
  const FrameBuffer original = synthetic_frame(s.width, s.height);
  const FrameBuffer received =
      degrade_to_psnr(original, target, name_seed(s.method, frame), report.psnr_cap_db);
  const DiffMap map = frame_diff_map(original, received);
  out << "# method=" << s.method << " run=0 frame=" << frame << " width=" << s.width
      << " height=" << s.height << " ledger_psnr_db=" << format_number(target)
      << " psnr_db=" << format_number(psnr(map.mean(), report.psnr_cap_db)) << '\n';
  for (int y = 0; y < s.height; ++y) {
    for (int x = 0; x < s.width; ++x) {
      if (x) out << ' ';
      out << static_cast<long>(map.squared_error[static_cast<std::size_t>(y * s.width + x)]);
    }
    out << '\n';
  }
  return out.str();
}

std::vector<fs::path> emit_report(const RunReport& report, const fs::path& out_dir,
                                  ReportFormat format) {
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw Error("cannot create " + out_dir.string() + ": " + ec.message());
  if (format == ReportFormat::kCsv) {
    return {write_csv(report, out_dir), write_psnr_csv(report, out_dir),
            write_throughput_csv(report, out_dir), write_diff_map(report, out_dir),
            write_events_csv(report, out_dir)};
  }
  return {write_summary_jsonl(report, out_dir), write_psnr_jsonl(report, out_dir),
          write_throughput_jsonl(report, out_dir), write_diff_map(report, out_dir),
          write_events_jsonl(report, out_dir)};
}

std::vector<fs::path> emit_traces(const RunReport& report, const fs::path& out_dir) {
  const fs::path dir = out_dir / "trace";
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error("cannot create " + dir.string() + ": " + ec.message());
  std::vector<fs::path> written;
  for (const auto& runs : report.runs) {
    for (const auto& r : runs) {
      const std::string stem = r.method + "_run" + std::to_string(r.replication);
      {
        OutFile f(dir / (stem + "_kernel.csv"));
        f.stream() << "time_ns,seq,target,action\n";
        for (const auto& line : r.trace) f.stream() << line << '\n';
        written.push_back(f.close());
      }
      {
        OutFile f(dir / (stem + "_delivery.csv"));
        auto& out = f.stream();
        out << "packet_id,flow_id,size,send_time,recv_time,dropped,drop_link\n";
        for (const auto& p : r.packets) {
          out << p.id << ',' << p.flow << ',' << p.size << ',' << format_seconds(p.send_time) << ','
              << (p.recv_time >= 0 ? format_seconds(p.recv_time) : std::string()) << ','
              << (p.dropped ? 1 : 0) << ',';
          if (p.dropped && p.drop_link >= 0) out << p.drop_link;
          out << '\n';
        }
        written.push_back(f.close());
      }
      {
        OutFile f(dir / (stem + "_rules.csv"));
        f.stream() << "switch,flow_id,egress_link\n";
        for (const auto& rule : r.rules) {
          f.stream() << rule.switch_node << ',' << rule.flow << ',' << rule.egress << '\n';
        }
        written.push_back(f.close());
      }
    }
  }
  return written;
}

}  // namespace svsim
