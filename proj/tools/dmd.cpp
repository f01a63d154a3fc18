// Command-line front end for the template matching library: compare and
// identify .dmt templates, evaluate score matrices, convert flavors, and
// generate synthetic evaluation sets.

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <dmd/dmd.hpp>
#include <json.hpp>

namespace fs = std::filesystem;

namespace {

constexpr int exit_usage = 1;
constexpr int exit_data = 2;

dmd::MatchParams load_params(const std::string& preset,
                             const std::string& params_file) {
  dmd::MatchParams p = dmd::preset_params(preset);
  if (!params_file.empty()) {
    std::ifstream is(params_file);
    if (!is) throw std::runtime_error("cannot open params file '" + params_file + "'");
    nlohmann::json j;
    try {
      is >> j;
    } catch (const nlohmann::json::exception& e) {
      throw std::runtime_error("malformed params file: " + std::string(e.what()));
    }
    const auto take_int = [&](const char* key, int& out) {
      if (j.contains(key)) out = j.at(key).get<int>();
    };
    const auto take_double = [&](const char* key, double& out) {
      if (j.contains(key)) out = j.at(key).get<double>();
    };
    take_int("n_min", p.n_min);
    take_int("n_max", p.n_max);
    take_double("tau", p.tau);
    take_double("mu", p.mu);
    take_int("relax_iterations", p.relax_iterations);
    take_double("relax_weight", p.relax_weight);
    take_double("mu_d", p.mu_d);
    take_double("tau_d", p.tau_d);
    take_double("mu_a1", p.mu_a1);
    take_double("tau_a1", p.tau_a1);
    take_double("mu_a2", p.mu_a2);
    take_double("tau_a2", p.tau_a2);
  }
  p.validate();
  return p;
}

/// Sorted (stem, path) pairs of every .dmt file directly inside a directory.
std::vector<std::pair<std::string, fs::path>> list_templates(const std::string& dir) {
  if (!fs::is_directory(dir))
    throw std::runtime_error("'" + dir + "' is not a directory");
  std::vector<std::pair<std::string, fs::path>> out;
  for (const fs::directory_entry& e : fs::directory_iterator(dir)) {
    if (!e.is_regular_file() || e.path().extension() != ".dmt") continue;
    out.emplace_back(e.path().stem().string(), e.path());
  }
  if (out.empty()) throw std::runtime_error("no .dmt files in '" + dir + "'");
  std::sort(out.begin(), out.end());
  return out;
}

int cmd_match(const std::string& query_path, const std::string& gallery_path,
              const dmd::MatchParams& prm) {
  const dmd::Template q = dmd::read_template_file(query_path);
  const dmd::Template g = dmd::read_template_file(gallery_path);
  const dmd::MatchResult r = dmd::match_templates(q, g, prm);
  std::printf("score %.6f\n", r.score);
  std::printf("n_m %d\n", r.n_m);
  for (const dmd::ScoredPair& p : r.pairs)
    std::printf("pair %d %d %.6f %.6f\n", p.query_index, p.gallery_index, p.s1, p.s2);
  return 0;
}

int cmd_identify(const std::string& query_dir, const std::string& gallery_dir,
                 const std::string& out_path, int workers,
                 const dmd::MatchParams& prm) {
  const auto query_files = list_templates(query_dir);
  const auto gallery_files = list_templates(gallery_dir);
  std::vector<dmd::Template> queries, gallery;
  dmd::ScoreMatrix sm;
  for (const auto& [stem, path] : query_files) {
    queries.push_back(dmd::read_template_file(path.string()));
    sm.query_ids.push_back(stem);
  }
  for (const auto& [stem, path] : gallery_files) {
    gallery.push_back(dmd::read_template_file(path.string()));
    sm.gallery_ids.push_back(stem);
  }
  dmd::ScoreMatrix scores = dmd::score_all(queries, gallery, prm, workers);
  scores.query_ids = std::move(sm.query_ids);
  scores.gallery_ids = std::move(sm.gallery_ids);
  std::ofstream os(out_path);
  if (!os) throw std::runtime_error("cannot open '" + out_path + "' for writing");
  dmd::write_scores_csv(scores, os);
  std::fprintf(stderr, "wrote %dx%d scores to %s\n", scores.rows, scores.cols,
               out_path.c_str());
  return 0;
}

int cmd_eval(const std::string& scores_path, const std::string& metric,
             const std::string& out_path, int max_rank, int points) {
  std::ifstream is(scores_path);
  if (!is) throw std::runtime_error("cannot open '" + scores_path + "'");
  const dmd::ScoreMatrix sm = dmd::read_scores_csv(is);

  if (metric == "rank1") {
    std::printf("rank1 %.6f\n", dmd::rank_k_accuracy(sm, 1));
    return 0;
  }
  if (metric.rfind("tar@far=", 0) == 0) {
    const std::string arg = metric.substr(8);
    std::size_t used = 0;
    double far = 0.0;
    try {
      far = std::stod(arg, &used);
    } catch (const std::exception&) {
      used = std::string::npos;
    }
    if (used != arg.size())
      throw CLI::ValidationError("--metric", "bad false accept rate '" + arg + "'");
    const auto [genuine, impostor] = dmd::split_scores(sm);
    std::printf("tar@far=%s %.6f\n", arg.c_str(), dmd::tar_at_far(genuine, impostor, far));
    return 0;
  }
  if (metric == "cmc") {
    if (out_path.empty()) throw CLI::ValidationError("--out", "cmc needs an output file");
    const int mr = max_rank > 0 ? max_rank : sm.cols;
    const auto curve = dmd::cmc_curve(sm, mr);
    std::ofstream os(out_path);
    if (!os) throw std::runtime_error("cannot open '" + out_path + "' for writing");
    os << "rank,accuracy\n";
    for (const auto& [rank, acc] : curve) {
      char buf[48];
      std::snprintf(buf, sizeof(buf), "%d,%.6f\n", rank, acc);
      os << buf;
    }
    if (!os) throw std::runtime_error("could not write '" + out_path + "'");
    std::printf("wrote %zu cmc points to %s\n", curve.size(), out_path.c_str());
    return 0;
  }
  if (metric == "det") {
    if (out_path.empty()) throw CLI::ValidationError("--out", "det needs an output file");
    const auto [genuine, impostor] = dmd::split_scores(sm);
    const auto curve = dmd::det_curve(genuine, impostor, points);
    std::ofstream os(out_path);
    if (!os) throw std::runtime_error("cannot open '" + out_path + "' for writing");
    os << "far,fnmr\n";
    for (const auto& [far, fnmr] : curve) {
      char buf[64];
      std::snprintf(buf, sizeof(buf), "%.6f,%.6f\n", far, fnmr);
      os << buf;
    }
    if (!os) throw std::runtime_error("could not write '" + out_path + "'");
    std::printf("wrote %zu det points to %s\n", curve.size(), out_path.c_str());
    return 0;
  }
  throw CLI::ValidationError(
      "--metric", "expected rank1, tar@far=<rate>, cmc, or det; got '" + metric + "'");
}

int cmd_binarize(const std::string& in_path, const std::string& out_path) {
  const dmd::Template t = dmd::read_template_file(in_path);
  const dmd::Template b = dmd::binarize_template(t);
  const std::size_t n = dmd::write_template_file(b, out_path);
  std::fprintf(stderr, "wrote %zu bytes to %s\n", n, out_path.c_str());
  return 0;
}

int cmd_inspect(const std::string& in_path) {
  const dmd::Template t = dmd::read_template_file(in_path);
  std::fputs(dmd::dump_template(t).c_str(), stdout);
  return 0;
}

int cmd_synth(const dmd::DatasetParams& prm, const std::string& out_dir) {
  fs::create_directories(out_dir);
  const dmd::Dataset ds = dmd::synth_dataset(prm);
  for (std::size_t k = 0; k < ds.templates.size(); ++k) {
    const fs::path path = fs::path(out_dir) / (ds.ids[k] + ".dmt");
    dmd::write_template_file(dmd::Template(ds.templates[k]), path.string());
  }
  const fs::path corr_path = fs::path(out_dir) / "correspondences.csv";
  std::ofstream os(corr_path);
  if (!os) throw std::runtime_error("cannot open '" + corr_path.string() + "'");
  os << "finger,impression,record_index,model_index\n";
  std::size_t k = 0;
  for (int f = 0; f < prm.fingers; ++f)
    for (int i = 0; i < prm.impressions; ++i, ++k)
      for (const auto& [record_idx, model_idx] : ds.correspondences[k])
        os << dmd::finger_label(dmd::dataset_id(f, i)) << ',' << i << ','
           << record_idx << ',' << model_idx << '\n';
  if (!os) throw std::runtime_error("could not write '" + corr_path.string() + "'");
  std::fprintf(stderr, "wrote %zu templates to %s\n", ds.templates.size(),
               out_dir.c_str());
  return 0;
}

int cmd_bench(const std::string& dir, int pairs, const std::string& preset,
              const dmd::MatchParams& prm) {
  std::vector<dmd::Template> pool;
  for (const auto& [stem, path] : list_templates(dir))
    pool.push_back(dmd::read_template_file(path.string()));
  const dmd::BenchReport r = dmd::bench_matching(pool, pairs, prm, preset);
  std::puts(dmd::format_report(r).c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fingerprint template matcher (dense minutia descriptors)"};
  app.require_subcommand(1);

  std::string preset = "verifinger";
  std::string params_file;
  const auto add_params_opts = [&](CLI::App* cmd) {
    cmd->add_option("--preset", preset, "Parameter preset (verifinger|fdd)")
        ->check(CLI::IsMember({"verifinger", "fdd"}));
    cmd->add_option("--params-file", params_file,
                    "JSON file overriding individual matcher parameters");
  };

  // match
  std::string query_path, gallery_path;
  CLI::App* match = app.add_subcommand("match", "Score one template pair");
  match->add_option("query", query_path, "Query .dmt file")->required();
  match->add_option("gallery", gallery_path, "Gallery .dmt file")->required();
  add_params_opts(match);

  // identify
  std::string query_dir, gallery_dir, out_path;
  int workers = 1;
  CLI::App* identify =
      app.add_subcommand("identify", "Score every query against every gallery template");
  identify->add_option("--query-dir", query_dir, "Directory of query .dmt files")->required();
  identify->add_option("--gallery-dir", gallery_dir, "Directory of gallery .dmt files")->required();
  identify->add_option("--out", out_path, "Output scores CSV")->required();
  identify->add_option("--workers", workers, "Worker thread count")
      ->check(CLI::PositiveNumber);
  add_params_opts(identify);

  // eval
  std::string scores_path, metric, eval_out;
  int max_rank = 0, points = 100;
  CLI::App* eval = app.add_subcommand("eval", "Compute metrics from a scores CSV");
  eval->add_option("--scores", scores_path, "Scores CSV from identify")->required();
  eval->add_option("--metric", metric, "rank1 | tar@far=<rate> | cmc | det")->required();
  eval->add_option("--out", eval_out, "Output CSV for curve metrics");
  eval->add_option("--max-rank", max_rank, "Last rank of the cmc curve");
  eval->add_option("--points", points, "Number of det curve points");

  // binarize
  std::string bin_in, bin_out;
  CLI::App* binarize = app.add_subcommand("binarize", "Convert a float template to packed binary");
  binarize->add_option("input", bin_in, "Float .dmt file")->required();
  binarize->add_option("output", bin_out, "Binary .dmt file to write")->required();

  // inspect
  std::string inspect_in;
  CLI::App* inspect = app.add_subcommand("inspect", "Print a template summary");
  inspect->add_option("input", inspect_in, ".dmt file")->required();

  // synth
  dmd::DatasetParams ds;
  std::string synth_dir;
  CLI::App* synth = app.add_subcommand("synth", "Generate a synthetic template set");
  synth->add_option("--fingers", ds.fingers, "Number of fingers")->required();
  synth->add_option("--impressions", ds.impressions, "Impressions per finger")->required();
  synth->add_option("--seed", ds.seed, "Generator seed")->required();
  synth->add_option("--out-dir", synth_dir, "Output directory")->required();
  synth->add_option("--min-minutiae", ds.min_minutiae, "Fewest minutiae per finger");
  synth->add_option("--max-minutiae", ds.max_minutiae, "Most minutiae per finger");
  synth->add_option("--channels", ds.channels, "Descriptor channels");
  synth->add_option("--noise-sigma", ds.noise_sigma, "Descriptor noise stddev");
  synth->add_option("--mask-erosion", ds.mask_erosion, "Mask border erosion fraction");
  synth->add_option("--dropout", ds.dropout, "Minutia dropout probability");
  synth->add_option("--spurious", ds.spurious, "Spurious minutia rate");
  synth->add_option("--max-translation", ds.max_translation, "Pose translation bound (px)");

  // bench
  std::string bench_dir;
  int bench_pairs = 1000;
  CLI::App* bench = app.add_subcommand("bench", "Measure matching throughput over a pool");
  bench->add_option("--dir", bench_dir, "Directory of pool .dmt files")->required();
  bench->add_option("--pairs", bench_pairs, "Number of timed comparisons")
      ->check(CLI::PositiveNumber);
  add_params_opts(bench);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : exit_usage;
  }

  try {
    if (*match) return cmd_match(query_path, gallery_path, load_params(preset, params_file));
    if (*identify)
      return cmd_identify(query_dir, gallery_dir, out_path, workers,
                          load_params(preset, params_file));
    if (*eval) return cmd_eval(scores_path, metric, eval_out, max_rank, points);
    if (*binarize) return cmd_binarize(bin_in, bin_out);
    if (*inspect) return cmd_inspect(inspect_in);
    if (*synth) return cmd_synth(ds, synth_dir);
    if (*bench)
      return cmd_bench(bench_dir, bench_pairs, preset, load_params(preset, params_file));
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_usage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_data;
  }
  return exit_usage;
}
