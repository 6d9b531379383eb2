#include "confound/report.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace confound {

using json = nlohmann::ordered_json;

namespace {

template <typename T>
json opt(const std::optional<T>& value) {
  return value ? json(*value) : json(nullptr);
}

template <typename T>
std::optional<T> get_opt(const json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  return it->template get<T>();
}

json config_to_json(const ExperimentConfig& c) {
  json j;
  j["mode"] = std::string(to_string(c.mode));
  j["dim"] = c.dim;
  j["latent"] = c.latent;
  j["samples"] = c.samples;
  j["runs"] = c.runs;
  j["seed"] = c.seed;
  j["alpha"] = c.alpha;
  j["null_count"] = c.null_count;
  j["normalize"] = c.normalize;
  j["method"] = std::string(to_string(c.method));
  j["noise_sd"] = opt(c.noise_sd);
  j["input_path"] = c.input_path;
  j["output_path"] = c.output_path;
  j["target"] = c.target;
  j["delimiter"] = std::string(1, c.delimiter);
  j["sample_sizes"] = c.sample_sizes;
  j["with_test"] = c.with_test;
  j["record_timing"] = c.record_timing;
  return j;
}

ExperimentConfig config_from_json(const json& j) {
  ExperimentConfig c;
  c.mode = mode_from_string(j.at("mode").get<std::string>());
  c.dim = j.at("dim").get<std::size_t>();
  c.latent = j.at("latent").get<std::size_t>();
  c.samples = j.at("samples").get<std::size_t>();
  c.runs = j.at("runs").get<std::size_t>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.alpha = j.at("alpha").get<double>();
  c.null_count = j.at("null_count").get<std::size_t>();
  c.normalize = j.at("normalize").get<bool>();
  c.method = null_method_from_string(j.at("method").get<std::string>());
  c.noise_sd = get_opt<double>(j, "noise_sd");
  c.input_path = j.at("input_path").get<std::string>();
  c.output_path = j.at("output_path").get<std::string>();
  c.target = j.at("target").get<std::string>();
  const auto delim = j.at("delimiter").get<std::string>();
  c.delimiter = delim.empty() ? ',' : delim.front();
  c.sample_sizes = j.at("sample_sizes").get<std::vector<std::size_t>>();
  c.with_test = j.at("with_test").get<bool>();
  c.record_timing = j.at("record_timing").get<bool>();
  return c;
}

json record_to_json(const RunRecord& r) {
  json j;
  j["index"] = r.index;
  j["seed"] = r.seed;
  j["sample_size"] = opt(r.sample_size);
  j["target"] = opt(r.target);
  j["true_beta"] = opt(r.true_beta);
  j["beta_hat"] = opt(r.beta_hat);
  j["theta_hat"] = opt(r.theta_hat);
  j["t_statistic"] = opt(r.t_statistic);
  j["p_value"] = opt(r.p_value);
  j["flags"] = r.flags;
  j["error"] = opt(r.error);
  return j;
}

RunRecord record_from_json(const json& j) {
  RunRecord r;
  r.index = j.at("index").get<std::size_t>();
  r.seed = j.at("seed").get<std::uint64_t>();
  r.sample_size = get_opt<std::size_t>(j, "sample_size");
  r.target = get_opt<std::string>(j, "target");
  r.true_beta = get_opt<double>(j, "true_beta");
  r.beta_hat = get_opt<double>(j, "beta_hat");
  r.theta_hat = get_opt<double>(j, "theta_hat");
  r.t_statistic = get_opt<double>(j, "t_statistic");
  r.p_value = get_opt<double>(j, "p_value");
  r.flags = j.at("flags").get<std::vector<std::string>>();
  r.error = get_opt<std::string>(j, "error");
  return r;
}

json summary_to_json(const Summary& s) {
  json j;
  j["completed"] = s.completed;
  j["failed"] = s.failed;
  j["pearson_beta"] = opt(s.pearson_beta);
  j["rejection_rate"] = opt(s.rejection_rate);
  j["alphas"] = s.alphas;
  json bins = json::array();
  for (const auto& b : s.beta_bins) {
    json jb;
    jb["lower"] = b.lower;
    jb["upper"] = b.upper;
    jb["count"] = b.count;
    json fractions = json::array();
    for (const auto& f : b.rejection_fraction) fractions.push_back(opt(f));
    jb["rejection_fraction"] = std::move(fractions);
    bins.push_back(std::move(jb));
  }
  j["beta_bins"] = std::move(bins);
  json hists = json::array();
  for (const auto& h : s.p_value_histograms) {
    json jh;
    jh["sample_size"] = h.sample_size;
    jh["runs"] = h.runs;
    jh["counts"] = h.counts;
    jh["fraction_below_alpha"] = h.fraction_below_alpha;
    jh["ks_statistic"] = h.ks_statistic;
    jh["ks_p_value"] = h.ks_p_value;
    hists.push_back(std::move(jh));
  }
  j["p_value_histograms"] = std::move(hists);
  json by_column = json::array();
  for (const auto& b : s.beta_hat_by_column) by_column.push_back(opt(b));
  j["beta_hat_by_column"] = std::move(by_column);
  return j;
}

Summary summary_from_json(const json& j) {
  Summary s;
  s.completed = j.at("completed").get<std::size_t>();
  s.failed = j.at("failed").get<std::size_t>();
  s.pearson_beta = get_opt<double>(j, "pearson_beta");
  s.rejection_rate = get_opt<double>(j, "rejection_rate");
  s.alphas = j.at("alphas").get<std::vector<double>>();
  for (const auto& jb : j.at("beta_bins")) {
    RejectionBin b;
    b.lower = jb.at("lower").get<double>();
    b.upper = jb.at("upper").get<double>();
    b.count = jb.at("count").get<std::size_t>();
    for (const auto& f : jb.at("rejection_fraction"))
      b.rejection_fraction.push_back(f.is_null() ? std::nullopt
                                                 : std::optional<double>(f.get<double>()));
    s.beta_bins.push_back(std::move(b));
  }
  for (const auto& jh : j.at("p_value_histograms")) {
    PValueHistogram h;
    h.sample_size = jh.at("sample_size").get<std::size_t>();
    h.runs = jh.at("runs").get<std::size_t>();
    h.counts = jh.at("counts").get<std::vector<std::size_t>>();
    h.fraction_below_alpha = jh.at("fraction_below_alpha").get<double>();
    h.ks_statistic = jh.at("ks_statistic").get<double>();
    h.ks_p_value = jh.at("ks_p_value").get<double>();
    s.p_value_histograms.push_back(std::move(h));
  }
  for (const auto& b : j.at("beta_hat_by_column"))
    s.beta_hat_by_column.push_back(b.is_null() ? std::nullopt
                                               : std::optional<double>(b.get<double>()));
  return s;
}

std::string format_real(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value,
                                       std::chars_format::general, 17);
  return ec == std::errc() ? std::string(buf, ptr) : std::string("nan");
}

template <typename T>
std::string cell(const std::optional<T>& value) {
  if (!value) return {};
  if constexpr (std::is_floating_point_v<T>) {
    return format_real(*value);
  } else if constexpr (std::is_same_v<T, std::string>) {
    return *value;
  } else {
    return std::to_string(*value);
  }
}

// RFC 4180 quoting when the cell contains a delimiter, quote or newline.
std::string quoted(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot open '" + path.string() + "' for writing");
  out << content;
  out.flush();
  if (!out) throw Error(ErrorCode::IoError, "failed writing '" + path.string() + "'");
}

}  // namespace

ReportFormat report_format_from_string(std::string_view name) {
  if (name == "json") return ReportFormat::Json;
  if (name == "csv") return ReportFormat::Csv;
  throw Error(ErrorCode::InvalidArgument, "unknown report format '" + std::string(name) + "'");
}

json report_to_json(const Report& report) {
  json j;
  j["config"] = config_to_json(report.config);
  json records = json::array();
  for (const auto& r : report.records) records.push_back(record_to_json(r));
  j["records"] = std::move(records);
  j["summary"] = summary_to_json(report.summary);
  if (report.elapsed_seconds) j["elapsed_seconds"] = *report.elapsed_seconds;
  return j;
}

Report report_from_json(const json& j) {
  Report report;
  report.config = config_from_json(j.at("config"));
  for (const auto& r : j.at("records")) report.records.push_back(record_from_json(r));
  report.summary = summary_from_json(j.at("summary"));
  report.elapsed_seconds = get_opt<double>(j, "elapsed_seconds");
  return report;
}

std::string report_json_string(const Report& report) {
  return report_to_json(report).dump(2) + "\n";
}

std::string records_csv(const Report& report) {
  std::ostringstream out;
  out << "index,seed,sample_size,target,true_beta,beta_hat,theta_hat,t_statistic,p_value,flags,"
         "error\n";
  for (const auto& r : report.records) {
    std::string flags;
    for (const auto& f : r.flags) {
      if (!flags.empty()) flags += ';';
      flags += f;
    }
    out << r.index << ',' << r.seed << ',' << cell(r.sample_size) << ','
        << quoted(cell(r.target)) << ',' << cell(r.true_beta) << ',' << cell(r.beta_hat) << ','
        << cell(r.theta_hat) << ',' << cell(r.t_statistic) << ',' << cell(r.p_value) << ','
        << flags << ',' << quoted(cell(r.error)) << '\n';
  }
  return out.str();
}

std::string summary_csv(const Report& report) {
  const Summary& s = report.summary;
  std::ostringstream out;
  out << "section,key,value\n";
  out << "runs,completed," << s.completed << '\n';
  out << "runs,failed," << s.failed << '\n';
  if (s.pearson_beta) out << "estimate,pearson_beta," << format_real(*s.pearson_beta) << '\n';
  if (s.rejection_rate) out << "test,rejection_rate," << format_real(*s.rejection_rate) << '\n';
  for (const auto& b : s.beta_bins) {
    const std::string section = "bin_" + format_real(b.lower) + "_" + format_real(b.upper);
    out << section << ",count," << b.count << '\n';
    for (std::size_t a = 0; a < b.rejection_fraction.size() && a < s.alphas.size(); ++a)
      out << section << ",rejection_at_" << format_real(s.alphas[a]) << ','
          << cell(b.rejection_fraction[a]) << '\n';
  }
  for (const auto& h : s.p_value_histograms) {
    const std::string section = "n_" + std::to_string(h.sample_size);
    out << section << ",runs," << h.runs << '\n';
    for (std::size_t k = 0; k < h.counts.size(); ++k)
      out << section << ",p_bin_" << k << ',' << h.counts[k] << '\n';
    out << section << ",fraction_below_alpha," << format_real(h.fraction_below_alpha) << '\n';
    out << section << ",ks_statistic," << format_real(h.ks_statistic) << '\n';
    out << section << ",ks_p_value," << format_real(h.ks_p_value) << '\n';
  }
  for (std::size_t j = 0; j < s.beta_hat_by_column.size(); ++j) {
    const std::string name = j < report.records.size() && report.records[j].target
                                 ? *report.records[j].target
                                 : std::to_string(j);
    out << "column," << quoted(name) << ',' << cell(s.beta_hat_by_column[j]) << '\n';
  }
  if (report.elapsed_seconds)
    out << "timing,elapsed_seconds," << format_real(*report.elapsed_seconds) << '\n';
  return out.str();
}

std::filesystem::path summary_path(const std::filesystem::path& path) {
  std::filesystem::path out = path;
  out.replace_filename(path.stem().string() + ".summary.csv");
  return out;
}

void emit_report(const Report& report, const std::filesystem::path& path, ReportFormat format) {
  if (format == ReportFormat::Json) {
    write_file(path, report_json_string(report));
    return;
  }
  write_file(path, records_csv(report));
  write_file(summary_path(path), summary_csv(report));
}

}  // namespace confound
