#include "capshock/io.hpp"

#include <cstdio>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "capshock/errors.hpp"
#include "capshock/gas_model.hpp"

namespace capshock {

NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(SweepRecord, gamma, v_plus, d, config_hash, failure_stage,
                                   failure_message, classification, d_star, sup_slope,
                                   slope_bound, slope_bound_ok, phi_bound, phi_bound_ok,
                                   argmax_on_phi_curve, lyapunov_monotone, residual_norm, L_minus,
                                   L_plus, mesh_points, profile_ok, C, C_within_gamma,
                                   has_contour, radius, winding, min_abs_D, samples, refinements,
                                   evans_steps, evans_rejections, has_real_scan,
                                   real_scan_sign_changes, real_scan_min_abs,
                                   real_scan_min_lambda, wall_seconds)

namespace {

namespace fs = std::filesystem;

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

class TableWriter {
 public:
  TableWriter(const std::string& kind, std::initializer_list<std::string> columns)
      : columns_(columns.size()) {
    out_ << "# capshock " << kind << " v" << kFormatVersion << '\n';
    body_ << '#';
    for (const auto& c : columns) body_ << ' ' << c;
    body_ << '\n';
  }

  TableWriter& meta(const std::string& key, const std::string& value) {
    out_ << "# " << key << '=' << value << '\n';
    return *this;
  }
  TableWriter& meta(const std::string& key, double value) { return meta(key, num(value)); }

  void row(std::initializer_list<double> values) {
    if (values.size() != columns_) throw ConsistencyError("row width does not match the header");
    bool first = true;
    for (double v : values) {
      if (!first) body_ << ' ';
      body_ << num(v);
      first = false;
    }
    body_ << '\n';
  }

  std::string str() const { return out_.str() + body_.str(); }

 private:
  std::size_t columns_;
  std::ostringstream out_;
  std::ostringstream body_;
};

void params_meta(TableWriter& t, const GasParams& p) {
  t.meta("gamma", p.gamma).meta("v_plus", p.v_plus).meta("d", p.d);
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

std::size_t Table::column(const std::string& name) const {
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (columns[i] == name) return i;
  }
  throw DomainError(kind + " table has no column '" + name + "'");
}

const std::string& Table::meta_value(const std::string& key) const {
  for (const auto& [k, v] : meta) {
    if (k == key) return v;
  }
  throw DomainError(kind + " table has no metadata '" + key + "'");
}

void write_atomic(const fs::path& path, const std::string& contents) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out << contents;
    out.flush();
    if (!out) throw Error("write failed for " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw Error("cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
}

Table read_table(const fs::path& path, const std::string& kind) {
  std::istringstream in(slurp(path));
  Table t;
  std::string line;
  if (!std::getline(in, line)) throw DomainError(path.string() + ": empty file");
  {
    std::istringstream head(line);
    std::string hash, tag, version;
    head >> hash >> tag >> t.kind >> version;
    if (hash != "#" || tag != "capshock" || version.size() < 2 || version[0] != 'v') {
      throw DomainError(path.string() + ": not a capshock table");
    }
    t.version = std::stoi(version.substr(1));
  }
  if (t.kind != kind) throw DomainError(path.string() + ": expected " + kind + ", found " + t.kind);
  if (t.version != kFormatVersion) {
    throw DomainError(path.string() + ": unsupported " + kind + " version " + std::to_string(t.version));
  }
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto eq = line.find('=');
      if (eq != std::string::npos) {
        t.meta.emplace_back(line.substr(2, eq - 2), line.substr(eq + 1));
      } else {
        std::istringstream cols(line.substr(1));
        std::string c;
        while (cols >> c) t.columns.push_back(c);
      }
      continue;
    }
    std::istringstream row(line);
    std::vector<double> values;
    std::string tok;
    while (row >> tok) values.push_back(std::stod(tok));
    if (values.size() != t.columns.size()) {
      throw DomainError(path.string() + ": row " + std::to_string(t.rows.size() + 1) + " has " +
                        std::to_string(values.size()) + " values for " +
                        std::to_string(t.columns.size()) + " columns");
    }
    t.rows.push_back(std::move(values));
  }
  return t;
}

void write_profile(const fs::path& path, const ProfileSolution& profile) {
  TableWriter t("profile", {"x", "v_hat", "v_hat_x", "v_hat_xx"});
  params_meta(t, profile.params);
  t.meta("classification", to_string(profile.classification)).meta("d_star", profile.params.d_star);
  for (std::size_t i = 0; i < profile.grid.size(); ++i) {
    t.row({profile.grid[i], profile.v_hat[i], profile.w_hat[i], profile.v_hat_xx[i]});
  }
  write_atomic(path, t.str());
}

void write_phase_portrait(const fs::path& path, const ProfileSolution& profile) {
  TableWriter t("phase_portrait", {"v_hat", "v_hat_x", "phi"});
  params_meta(t, profile.params);
  for (std::size_t i = 0; i < profile.grid.size(); ++i) {
    t.row({profile.v_hat[i], profile.w_hat[i], phi(profile.v_hat[i], profile.params)});
  }
  write_atomic(path, t.str());
}

void write_contour(const fs::path& path, const ContourResult& contour, const GasParams& params) {
  TableWriter t("contour", {"s", "re_lambda", "im_lambda", "re_D", "im_D", "steps", "rejections"});
  params_meta(t, params);
  t.meta("winding", std::to_string(contour.winding))
      .meta("min_abs_D", contour.min_abs_D)
      .meta("refinements", std::to_string(contour.refinements_used));
  for (const auto& s : contour.samples) {
    t.row({s.s, s.lambda.real(), s.lambda.imag(), s.value.real(), s.value.imag(),
           static_cast<double>(s.steps), static_cast<double>(s.rejections)});
  }
  write_atomic(path, t.str());
}

void write_real_scan(const fs::path& path, const RealAxisScan& scan, const GasParams& params) {
  TableWriter t("real_scan", {"lambda", "re_D", "im_D"});
  params_meta(t, params);
  t.meta("sign_changes", std::to_string(scan.sign_changes)).meta("min_abs_D", scan.min_abs);
  for (std::size_t i = 0; i < scan.lambdas.size(); ++i) {
    t.row({scan.lambdas[i], scan.values[i].real(), scan.values[i].imag()});
  }
  write_atomic(path, t.str());
}

std::string record_to_text(const SweepRecord& record) {
  nlohmann::json header{{"format", "capshock-record"}, {"version", kFormatVersion}};
  return header.dump() + '\n' + nlohmann::json(record).dump() + '\n';
}

SweepRecord record_from_text(const std::string& text) {
  std::istringstream in(text);
  std::string head, body;
  std::getline(in, head);
  std::getline(in, body);
  try {
    const auto h = nlohmann::json::parse(head);
    if (h.at("format") != "capshock-record" || h.at("version") != kFormatVersion) {
      throw DomainError("unsupported record header: " + head);
    }
    return nlohmann::json::parse(body).get<SweepRecord>();
  } catch (const nlohmann::json::exception& e) {
    throw DomainError(std::string("malformed record: ") + e.what());
  }
}

void write_record(const fs::path& path, const SweepRecord& record) {
  write_atomic(path, record_to_text(record));
}

SweepRecord read_record(const fs::path& path) {
  try {
    return record_from_text(slurp(path));
  } catch (const DomainError& e) {
    throw DomainError(path.string() + ": " + e.what());
  }
}

std::string summary_table(const std::vector<SweepRecord>& records) {
  std::ostringstream out;
  out << "# capshock summary v" << kFormatVersion << '\n';
  out << "v_plus\td\tgamma\tclassification\twinding\tmin_abs_D\tC\treal_crossing\tpass\tfailure\n";
  char buf[512];
  for (const auto& r : records) {
    const std::string winding = r.has_contour ? std::to_string(r.winding) : "NA";
    const std::string crossing =
        r.has_real_scan ? (r.real_scan_sign_changes > 0 ? "yes" : "no") : "NA";
    std::snprintf(buf, sizeof buf, "%.4f\t%.4f\t%.6g\t%s\t%s\t%.6e\t%.6f\t%s\t%s\t%s\n", r.v_plus,
                  r.d, r.gamma, r.classification.empty() ? "NA" : r.classification.c_str(),
                  winding.c_str(), r.min_abs_D, r.C, crossing.c_str(), r.pass() ? "yes" : "no",
                  r.failure_stage.empty() ? "-" : r.failure_stage.c_str());
    out << buf;
  }
  return out.str();
}

std::vector<fs::path> emit_figure_data(const PointRun& run, const fs::path& dir) {
  std::vector<fs::path> written;
  if (run.profile) {
    written.push_back(dir / "profile.dat");
    write_profile(written.back(), *run.profile);
    written.push_back(dir / "phase.dat");
    write_phase_portrait(written.back(), *run.profile);
  }
  if (run.contour) {
    written.push_back(dir / "contour.dat");
    write_contour(written.back(), *run.contour, run.profile->params);
  }
  if (run.scan) {
    written.push_back(dir / "real_scan.dat");
    write_real_scan(written.back(), *run.scan, run.profile->params);
  }
  written.push_back(dir / "record.jsonl");
  write_record(written.back(), run.record);
  return written;
}

}  // namespace capshock
