#include "qreadout/bench/report.hpp"

#include <fstream>
#include <sstream>

#include "qreadout/errors.hpp"
#include "qreadout/io/container.hpp"

namespace qreadout::bench {

namespace {

using io::format_double;

std::string fmt(double v) { return format_double(v); }

std::string states_text(const std::vector<int>& states) {
  std::string out;
  for (std::size_t i = 0; i < states.size(); ++i) out += (i ? ";" : "") + std::to_string(states[i]);
  return out;
}

double timing(const metrics::EvalReport& r, const std::string& key) {
  const auto it = r.timing_s.find(key);
  return it == r.timing_s.end() ? 0.0 : it->second;
}

nlohmann::json config_json(const ExperimentConfig& config) {
  nlohmann::json c = nlohmann::json::object();
  std::istringstream in(config.canonical_text());
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find(" = ");
    c[line.substr(0, eq)] = line.substr(eq + 3);
  }
  return c;
}

}  // namespace

std::string rows_csv(const ExperimentConfig& config, const std::vector<BenchmarkRow>& rows) {
  const std::size_t k = config.states.size();
  std::ostringstream out;
  out << "method,tm_ns,repeat,data_seed,split_seed,model_seed,config_hash,failed,n_test,global";
  for (int s : config.states) out << ",acc_state_" << s;
  for (std::size_t r = 0; r < k; ++r) {
    for (std::size_t c = 0; c < k; ++c) out << ",confusion_" << config.states[r] << "_" << config.states[c];
  }
  for (const auto& t : kTimingColumns) out << ',' << t;
  out << '\n';
  for (const auto& row : rows) {
    const auto& r = row.report;
    out << r.method << ',' << fmt(r.tm_ns) << ',' << r.repeat << ',' << row.data_seed << ',' << r.split_seed << ','
        << r.model_seed << ',' << row.config_hash << ',' << (r.failed ? 1 : 0) << ',' << r.n_test << ','
        << (r.failed ? "" : fmt(r.global));
    for (int s : config.states) {
      out << ',';
      if (!r.failed) out << fmt(r.per_state.at(s));
    }
    for (std::size_t a = 0; a < k; ++a) {
      for (std::size_t b = 0; b < k; ++b) {
        out << ',';
        if (!r.failed) out << fmt(r.confusion.rates(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)));
      }
    }
    for (const auto& t : kTimingColumns) out << ',' << fmt(timing(r, t));
    out << '\n';
  }
  return out.str();
}

std::string summary_csv(const ExperimentConfig& config, const std::vector<SummaryRow>& summary) {
  std::ostringstream out;
  out << "method,tm_ns,ok,failed,global_mean,global_std";
  for (int s : config.states) out << ",acc_state_" << s << "_mean,acc_state_" << s << "_std";
  out << ",master_seed,config_hash";
  for (const auto& t : kTimingColumns) out << ',' << t << "_mean";
  out << '\n';
  const std::string hash = config.hash();
  for (const auto& s : summary) {
    out << to_string(s.method) << ',' << fmt(s.tm_ns) << ',' << s.ok << ',' << s.failed << ',' << fmt(s.global_mean)
        << ',' << fmt(s.global_std);
    for (int st : config.states) out << ',' << fmt(s.state_mean.at(st)) << ',' << fmt(s.state_std.at(st));
    out << ',' << config.sim.master_seed << ',' << hash;
    for (const auto& t : kTimingColumns) {
      const auto it = s.timing_mean.find(t);
      out << ',' << fmt(it == s.timing_mean.end() ? 0.0 : it->second);
    }
    out << '\n';
  }
  return out.str();
}

nlohmann::json report_json(const ExperimentConfig& config, const std::vector<BenchmarkRow>& rows,
                           const std::vector<SummaryRow>& summary) {
  nlohmann::json j;
  j["format"] = "qreadout-benchmark-report";
  j["version"] = 1;
  j["config_hash"] = config.hash();
  j["config"] = config_json(config);
  j["tm_list_ns"] = config.tm_list_ns;
  j["states"] = config.states;
  nlohmann::json jr = nlohmann::json::array();
  for (const auto& row : rows) {
    const auto& r = row.report;
    nlohmann::json e;
    e["method"] = r.method;
    e["tm_ns"] = r.tm_ns;
    e["repeat"] = r.repeat;
    e["data_seed"] = row.data_seed;
    e["split_seed"] = r.split_seed;
    e["model_seed"] = r.model_seed;
    e["config_hash"] = row.config_hash;
    e["failed"] = r.failed;
    if (r.failed) {
      e["failure"] = r.failure;
    } else {
      e["n_test"] = r.n_test;
      e["global_accuracy"] = r.global;
      nlohmann::json ps = nlohmann::json::object();
      for (const auto& [s, a] : r.per_state) ps[std::to_string(s)] = a;
      e["per_state_accuracy"] = ps;
      nlohmann::json cm = nlohmann::json::array();
      for (Eigen::Index a = 0; a < r.confusion.rates.rows(); ++a) {
        std::vector<double> line(static_cast<std::size_t>(r.confusion.rates.cols()));
        for (Eigen::Index b = 0; b < r.confusion.rates.cols(); ++b) line[static_cast<std::size_t>(b)] = r.confusion.rates(a, b);
        cm.push_back(line);
      }
      e["confusion"] = cm;
      std::vector<bool> empty_rows = r.confusion.empty_rows;
      e["confusion_empty_rows"] = empty_rows;
    }
    e["timing_s"] = r.timing_s;
    jr.push_back(e);
  }
  j["rows"] = jr;
  nlohmann::json js = nlohmann::json::array();
  for (const auto& s : summary) {
    nlohmann::json e;
    e["method"] = to_string(s.method);
    e["tm_ns"] = s.tm_ns;
    e["ok"] = s.ok;
    e["failed"] = s.failed;
    e["global_mean"] = s.global_mean;
    e["global_std"] = s.global_std;
    nlohmann::json m = nlohmann::json::object(), sd = nlohmann::json::object();
    for (const auto& [st, v] : s.state_mean) m[std::to_string(st)] = v;
    for (const auto& [st, v] : s.state_std) sd[std::to_string(st)] = v;
    e["per_state_mean"] = m;
    e["per_state_std"] = sd;
    e["timing_mean_s"] = s.timing_mean;
    js.push_back(e);
  }
  j["summary"] = js;
  return j;
}

std::string strip_timing(const std::string& text) {
  std::istringstream in(text);
  std::ostringstream out;
  std::string line;
  while (std::getline(in, line)) {
    for (std::size_t i = 0; i < kTimingColumns.size(); ++i) {
      const auto comma = line.rfind(',');
      if (comma == std::string::npos) break;
      line.erase(comma);
    }
    out << line << '\n';
  }
  return out.str();
}

std::string latent_sweep_csv(const ExperimentConfig& config, double tm_ns, const std::vector<LatentSweepRow>& rows) {
  std::ostringstream out;
  out << "fraction,fraction_value,latent_dim,l1,l2,ok,failed,accuracy_mean,accuracy_std,loss_mean,loss_std,"
         "ae_train_s_mean,train_s_mean,tm_ns,master_seed,config_hash\n";
  const std::string hash = config.hash();
  for (const auto& r : rows) {
    out << r.fraction.to_string() << ',' << fmt(r.fraction.value()) << ',' << r.latent_dim << ',' << r.l1 << ','
        << r.l2 << ',' << r.ok << ',' << r.failed << ',' << fmt(r.accuracy_mean) << ',' << fmt(r.accuracy_std) << ','
        << fmt(r.loss_mean) << ',' << fmt(r.loss_std) << ',' << fmt(r.ae_train_s_mean) << ','
        << fmt(r.train_s_mean) << ',' << fmt(tm_ns) << ',' << config.sim.master_seed << ',' << hash << '\n';
  }
  return out.str();
}

std::string dataset_sweep_csv(const ExperimentConfig& config, double tm_ns, const std::vector<DatasetSweepRow>& rows) {
  std::ostringstream out;
  out << "size,ok,failed,accuracy_mean,accuracy_std,loss_curve_ids,train_s_mean,train_s_std,tm_ns,states,"
         "master_seed,config_hash\n";
  const std::string hash = config.hash();
  for (const auto& r : rows) {
    std::string ids;
    for (const auto& [id, curve] : r.loss_curves) ids += (ids.empty() ? "" : ";") + id;
    out << r.size << ',' << r.ok << ',' << r.failed << ',' << fmt(r.accuracy_mean) << ',' << fmt(r.accuracy_std) << ','
        << ids << ',' << fmt(r.train_s_mean) << ',' << fmt(r.train_s_std) << ',' << fmt(tm_ns) << ','
        << states_text(config.states) << ',' << config.sim.master_seed << ',' << hash << '\n';
  }
  return out.str();
}

std::string loss_curves_csv(const std::vector<DatasetSweepRow>& rows) {
  std::ostringstream out;
  out << "curve_id,epoch,loss\n";
  for (const auto& r : rows) {
    for (const auto& [id, curve] : r.loss_curves) {
      for (std::size_t e = 0; e < curve.size(); ++e) out << id << ',' << e + 1 << ',' << fmt(curve[e]) << '\n';
    }
  }
  return out.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw DataError("write failed: " + path.string());
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

double ReportSummary::at(const std::string& method, double tm) const {
  const auto m = global_mean.find(method);
  if (m == global_mean.end()) throw DataError(name + ": no results for method '" + method + "'");
  const auto t = m->second.find(tm);
  if (t == m->second.end()) throw DataError(name + ": no results for " + method + " at T_m " + fmt(tm));
  return t->second;
}

ReportSummary read_report(const std::filesystem::path& path) {
  ReportSummary out;
  out.name = path.string();
  try {
    const nlohmann::json j = nlohmann::json::parse(read_text(path));
    if (j.value("format", "") != "qreadout-benchmark-report") throw DataError(out.name + ": not a benchmark report");
    if (j.at("version").get<int>() != 1) throw VersionMismatch(out.name + ": unsupported report version");
    out.config_hash = j.at("config_hash").get<std::string>();
    out.tm_list_ns = j.at("tm_list_ns").get<std::vector<double>>();
    for (const auto& s : j.at("summary")) {
      if (s.at("ok").get<std::size_t>() == 0) continue;
      out.global_mean[s.at("method").get<std::string>()][s.at("tm_ns").get<double>()] = s.at("global_mean").get<double>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(out.name + ": malformed report (" + e.what() + ")");
  }
  return out;
}

std::string compare_csv(const std::vector<ReportSummary>& reports, const CompareOptions& options) {
  if (reports.empty() || reports.size() > 2) throw UsageError("compare takes one or two reports");
  if (options.across && reports.size() != 2) throw UsageError("--across needs exactly two reports");
  if (reports.size() == 2 && reports[0].tm_list_ns != reports[1].tm_list_ns) {
    throw DataError("reports have different T_m grids");
  }
  std::ostringstream out;
  out << "kind,report,tm_ns,a,b,diff_pp\n";
  auto emit_means = [&](const std::string& name, const std::vector<double>& tms, const std::vector<double>& diffs,
                        double& all_mean) {
    double all = 0.0, ml = 0.0;
    std::size_t n_ml = 0;
    for (std::size_t i = 0; i < diffs.size(); ++i) {
      all += diffs[i];
      if (tms[i] >= options.medium_long_from_ns) {
        ml += diffs[i];
        ++n_ml;
      }
    }
    all_mean = all / static_cast<double>(diffs.size());
    out << "mean_all," << name << ",,,," << fmt(all_mean) << '\n';
    out << "mean_medium_long," << name << ",,,," << (n_ml ? fmt(ml / static_cast<double>(n_ml)) : "") << '\n';
  };

  if (options.across) {
    const auto& a = reports[1];
    const auto& b = reports[0];
    std::vector<double> diffs;
    for (double tm : a.tm_list_ns) {
      const double va = a.at(options.method_a, tm), vb = b.at(options.method_a, tm);
      diffs.push_back(100.0 * (va - vb));
      out << "tm," << a.name << " vs " << b.name << ',' << fmt(tm) << ',' << fmt(va) << ',' << fmt(vb) << ','
          << fmt(diffs.back()) << '\n';
    }
    double mean = 0.0;
    emit_means(a.name + " vs " + b.name, a.tm_list_ns, diffs, mean);
    return out.str();
  }

  std::vector<double> means;
  for (const auto& r : reports) {
    std::vector<double> diffs;
    for (double tm : r.tm_list_ns) {
      const double va = r.at(options.method_a, tm), vb = r.at(options.method_b, tm);
      diffs.push_back(100.0 * (va - vb));
      out << "tm," << r.name << ',' << fmt(tm) << ',' << fmt(va) << ',' << fmt(vb) << ',' << fmt(diffs.back()) << '\n';
    }
    double mean = 0.0;
    emit_means(r.name, r.tm_list_ns, diffs, mean);
    means.push_back(mean);
  }
  if (means.size() == 2) {
    out << "flag_second_mean_ge_first,,,,," << (means[1] >= means[0] ? "true" : "false") << '\n';
  }
  return out.str();
}

}  // namespace qreadout::bench
