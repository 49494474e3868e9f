// bench: command-line front end for the VPR benchmarking harness.
//
//   bench run     run a benchmark and write a JSON or CSV report
//   bench rmf     evaluate RMF on a saved matches list
//   bench report  summarize or verify a saved JSON report
//   bench describe  write HOG / CoHOG descriptor files for an image set
//   bench synth   generate a synthetic corpus in the dataset layout

#include <charconv>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "vprbench/vprbench.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitData = 3;

struct Resolution {
  int width = 512;
  int height = 512;
};

Resolution parse_resolution(const std::string& s) {
  const auto x = s.find_first_of("xX");
  Resolution r;
  if (x == std::string::npos) throw vpr::Error(vpr::ErrorCode::InvalidParam, "resolution must look like WxH");
  const auto parse = [&](std::string_view part, int& out) {
    const auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), out);
    if (ec != std::errc{} || ptr != part.data() + part.size() || out < 2) {
      throw vpr::Error(vpr::ErrorCode::InvalidParam, "bad resolution '" + s + "'");
    }
  };
  parse(std::string_view(s).substr(0, x), r.width);
  parse(std::string_view(s).substr(x + 1), r.height);
  return r;
}

/// Accepts a JSON report (uses its matches_list), a JSON array, or plain 0/1
/// tokens separated by whitespace or commas.
std::vector<std::uint8_t> read_matches(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw vpr::Error(vpr::ErrorCode::NotFound, path);
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();

  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && (text[first] == '{' || text[first] == '[')) {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
      throw vpr::Error(vpr::ErrorCode::FormatError, path + ": " + e.what());
    }
    const nlohmann::json& arr = j.is_object() ? j.at("matches_list") : j;
    std::vector<std::uint8_t> out;
    for (const auto& v : arr) {
      const int m = v.get<int>();
      if (m != 0 && m != 1) throw vpr::Error(vpr::ErrorCode::FormatError, path + ": matches must be 0 or 1");
      out.push_back(static_cast<std::uint8_t>(m));
    }
    return out;
  }

  std::vector<std::uint8_t> out;
  std::string token;
  std::size_t index = 0;
  for (char c : text) {
    if (c == ',' || std::isspace(static_cast<unsigned char>(c))) {
      if (!token.empty()) {
        if (token != "0" && token != "1") {
          throw vpr::Error(vpr::ErrorCode::FormatError, path + ": entry " + std::to_string(index) + " is '" + token + "'");
        }
        out.push_back(token == "1" ? 1 : 0);
        ++index;
        token.clear();
      }
    } else {
      token.push_back(c);
    }
  }
  if (!token.empty()) {
    if (token != "0" && token != "1") throw vpr::Error(vpr::ErrorCode::FormatError, path + ": bad entry '" + token + "'");
    out.push_back(token == "1" ? 1 : 0);
  }
  if (out.empty()) throw vpr::Error(vpr::ErrorCode::FormatError, path + ": empty matches list");
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Visual place recognition benchmark harness"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(vpr::kToolVersion));

  // run
  auto* run = app.add_subcommand("run", "Run a benchmark over a dataset");
  std::string technique_name = "hog";
  std::string dataset, gt, desc, ref_desc, resolution = "512x512", power_log, out_path, format = "json";
  double fps = 50.0, k = 1.0, frames_per_meter = 0.0, velocity = 0.0, power_offset = 0.0, interval = 0.1;
  double entropy_threshold = 0.5;
  int region_size = 16;
  std::size_t workers = 1, tolerance = 0;
  run->add_option("--technique", technique_name, "hog | cohog | external")
      ->check(CLI::IsMember({"hog", "cohog", "external"}));
  run->add_option("--dataset", dataset, "Directory holding query/ and ref/")->required()->check(CLI::ExistingDirectory);
  run->add_option("--gt", gt, "Ground truth CSV (query_index,ref_index)")->required()->check(CLI::ExistingFile);
  run->add_option("--desc", desc, "Query descriptor file (external technique)")->check(CLI::ExistingFile);
  run->add_option("--ref-desc", ref_desc, "Reference descriptor file (external technique)")->check(CLI::ExistingFile);
  run->add_option("--resolution", resolution, "Working resolution WxH");
  run->add_option("--fps", fps, "Camera frame rate F");
  run->add_option("--k", k, "Pipeline down-sampling constant K");
  run->add_option("--frames-per-meter", frames_per_meter, "Frames sampled per meter D");
  run->add_option("--velocity", velocity, "Platform speed V in m/s");
  run->add_option("--tolerance", tolerance, "Ground-truth tolerance in frames");
  run->add_option("--region-size", region_size, "CoHOG region size in pixels");
  run->add_option("--entropy-threshold", entropy_threshold, "CoHOG entropy threshold in bits");
  auto* power_opt = run->add_option("--power-log", power_log, "Power meter CSV")->check(CLI::ExistingFile);
  run->add_option("--power-offset", power_offset, "Seconds from power-log epoch to run start")->needs(power_opt);
  run->add_option("--workers", workers, "Descriptor/match worker threads")->check(CLI::PositiveNumber);
  run->add_option("--interval", interval, "Resource sampling interval in seconds");
  run->add_option("--out", out_path, "Report output path (stdout summary only when omitted)");
  run->add_option("--format", format, "json | csv")->check(CLI::IsMember({"json", "csv"}));

  // rmf
  auto* rmf = app.add_subcommand("rmf", "Evaluate RMF on a saved matches list");
  std::string matches_path;
  std::int64_t g = 1;
  rmf->add_option("--matches", matches_path, "Matches list file or JSON report")->required()->check(CLI::ExistingFile);
  rmf->add_option("--g", g, "Frame interval G")->required();

  // report
  auto* report = app.add_subcommand("report", "Inspect a saved JSON report");
  std::string report_in;
  bool summary = false, verify = false;
  report->add_option("--in", report_in, "JSON report")->required()->check(CLI::ExistingFile);
  report->add_flag("--summary", summary, "Print the table-style summary");
  report->add_flag("--verify", verify, "Recompute accuracy, t_R, G and RMF from the report's own fields");

  // describe
  auto* describe = app.add_subcommand("describe", "Write descriptors for one image set");
  std::string describe_technique = "hog", describe_set = "query", describe_out;
  describe->add_option("--technique", describe_technique, "hog | cohog")->check(CLI::IsMember({"hog", "cohog"}));
  describe->add_option("--dataset", dataset, "Dataset directory")->required()->check(CLI::ExistingDirectory);
  describe->add_option("--set", describe_set, "query | ref")->check(CLI::IsMember({"query", "ref"}));
  describe->add_option("--resolution", resolution, "Working resolution WxH");
  describe->add_option("--out", describe_out, "Output descriptor file")->required();

  // synth
  auto* synth = app.add_subcommand("synth", "Generate a synthetic corpus");
  std::string synth_out;
  std::size_t places = 10;
  std::uint64_t seed = 1;
  double noise = 0.0;
  synth->add_option("--out", synth_out, "Output directory")->required();
  synth->add_option("--places", places, "Number of places");
  synth->add_option("--resolution", resolution, "Image size WxH");
  synth->add_option("--seed", seed, "Random seed");
  synth->add_option("--noise", noise, "Gaussian noise sigma added to query views");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*run) {
      vpr::RunConfig cfg;
      cfg.technique = *vpr::parse_technique(technique_name);
      cfg.dataset_dir = dataset;
      cfg.ground_truth = gt;
      if (!desc.empty()) cfg.query_descriptors = desc;
      if (!ref_desc.empty()) cfg.ref_descriptors = ref_desc;
      const Resolution res = parse_resolution(resolution);
      cfg.width = res.width;
      cfg.height = res.height;
      cfg.cohog.region_size = region_size;
      cfg.cohog.entropy_threshold = entropy_threshold;
      cfg.rmf.fps = fps;
      cfg.rmf.k = k;
      cfg.rmf.frames_per_meter = frames_per_meter;
      cfg.rmf.velocity = velocity;
      cfg.gt_tolerance = tolerance;
      cfg.workers = workers;
      cfg.telemetry_interval = interval;
      if (!power_log.empty()) cfg.power_log = power_log;
      cfg.power_clock_offset = power_offset;

      const vpr::BenchmarkReport r = vpr::run_benchmark(cfg);
      if (!out_path.empty()) {
        vpr::emit_report(r, out_path, format == "csv" ? vpr::ReportFormat::Csv : vpr::ReportFormat::Json);
      }
      vpr::print_summary(r, std::cout);
    } else if (*rmf) {
      const std::vector<std::uint8_t> matches = read_matches(matches_path);
      const vpr::RmfCount c = vpr::compute_rmf(matches, g);
      std::cout << "N_q " << matches.size() << "\nM_q " << c.matched << "\nG " << g << "\nRMF " << c.rmf << '\n';
    } else if (*report) {
      const vpr::BenchmarkReport r = vpr::read_report(report_in);
      if (summary || !verify) vpr::print_summary(r, std::cout);
      if (verify) {
        const vpr::ReportCheck check = vpr::verify_report(r);
        if (!check.ok) {
          for (const auto& m : check.mismatches) std::cerr << "mismatch: " << m << '\n';
          return kExitData;
        }
        std::cout << "report verified: accuracy, t_R, G, M_q and RMF recompute exactly\n";
      }
    } else if (*describe) {
      const Resolution res = parse_resolution(resolution);
      const auto files = vpr::list_images(std::filesystem::path(dataset) / describe_set);
      if (describe_technique == "hog") {
        std::vector<vpr::GlobalDescriptor> descs;
        for (const auto& f : files) descs.push_back(vpr::hog_describe(vpr::resize(vpr::load_image(f), res.width, res.height)));
        vpr::write_descriptor_file(describe_out, descs, vpr::Metric::Cosine);
      } else {
        std::vector<vpr::RegionalDescriptorSet> sets;
        for (const auto& f : files) sets.push_back(vpr::cohog_describe(vpr::resize(vpr::load_image(f), res.width, res.height)));
        vpr::write_regional_descriptor_file(describe_out, sets);
      }
      std::cout << "wrote " << files.size() << " descriptors to " << describe_out << '\n';
    } else if (*synth) {
      const Resolution res = parse_resolution(resolution);
      vpr::SyntheticCorpusSpec spec;
      spec.places = places;
      spec.width = res.width;
      spec.height = res.height;
      spec.seed = seed;
      spec.query_noise_sigma = noise;
      vpr::write_synthetic_corpus(synth_out, spec);
      std::cout << "wrote " << places << " places to " << synth_out << '\n';
    }
  } catch (const vpr::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return vpr::is_config_error(e.code()) ? kExitConfig : kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  }
  return 0;
}
