// Command-line front end: attack generation, signal analysis, scoring, the
// batch harness and the annotation server.

#include <csignal>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "advbench/annotation.h"
#include "advbench/annotation_http.h"
#include "advbench/attack.h"
#include "advbench/dsp.h"
#include "advbench/error.h"
#include "advbench/harness.h"
#include "advbench/kv_file.h"
#include "advbench/metrics.h"
#include "advbench/transcribers.h"

namespace fs = std::filesystem;
using namespace advbench;

namespace {

std::string slurp(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::IoFailure, "cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

AttackSpec make_spec(const std::string& kind, double gain_db, const std::string& overlay_path) {
  if (kind == "reverse-overlay") return AttackSpec::reverse_overlay(gain_db);
  if (kind == "precomputed") {
    if (overlay_path.empty()) throw Error(ErrorKind::InvalidArgument, "--kind precomputed needs --overlay");
    return AttackSpec::precomputed(overlay_path, gain_db);
  }
  throw Error(ErrorKind::InvalidArgument, "unknown attack kind '" + kind + "'");
}

annotation::AnnotationServer* g_server = nullptr;

void on_signal(int) {
  if (g_server) g_server->stop();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Reverse-overlay adversarial audio workbench"};
  app.require_subcommand(1);

  // attack
  auto* attack = app.add_subcommand("attack", "Generate x + reversed(x) attenuated by p dB");
  std::string attack_in, attack_out, attack_kind = "reverse-overlay", attack_overlay, attack_offsets;
  double attack_gain = 0.0;
  attack->add_option("--in", attack_in, "Source wav, or a directory with --offsets")->required();
  attack->add_option("--out", attack_out, "Output wav, or output directory with --offsets")->required();
  attack->add_option("--kind", attack_kind, "reverse-overlay | precomputed");
  attack->add_option("--gain-db", attack_gain, "Gain offset p in dB (<= 0)");
  attack->add_option("--overlay", attack_overlay, "Perturbation wav for --kind precomputed");
  attack->add_option("--offsets", attack_offsets, "Batch mode: comma list of offsets, e.g. 0,-5,-10,-15,-20");

  // analyze
  auto* analyze = app.add_subcommand("analyze", "FFT, mel spectrogram and MFCC export (CSV + PGM)");
  std::string analyze_in, analyze_out;
  bool want_fft = false, want_mel = false, want_mfcc = false;
  analyze->add_option("--in", analyze_in)->required();
  analyze->add_option("--out-dir", analyze_out)->required();
  analyze->add_flag("--fft", want_fft);
  analyze->add_flag("--melspec", want_mel);
  analyze->add_flag("--mfcc", want_mfcc);

  // wer
  auto* wer_cmd = app.add_subcommand("wer", "Print S D I N WER (tab separated)");
  std::string ref_path, hyp_path;
  wer_cmd->add_option("--ref", ref_path)->required();
  wer_cmd->add_option("--hyp", hyp_path)->required();

  // simil
  auto* simil = app.add_subcommand("simil", "Print cosine similarity and dB of b relative to a");
  std::string simil_a, simil_b;
  simil->add_option("--a", simil_a, "Reference waveform")->required();
  simil->add_option("--b", simil_b)->required();

  // run
  auto* run = app.add_subcommand("run", "Run the corpus x attack x transcriber experiment");
  std::string config_path, run_out;
  run->add_option("--config", config_path)->required();
  run->add_option("--out", run_out, "Overrides output_dir from the config");

  // serve
  auto* serve = app.add_subcommand("serve", "Human transcription service");
  std::string cond_dir, records_path, host = "0.0.0.0", ui_dir;
  int port = 8080;
  std::uint64_t seed = 0;
  std::size_t per_annotator = annotation::kDefaultAssignmentSize;
  serve->add_option("--conditions-dir", cond_dir)->required();
  serve->add_option("--records", records_path)->required();
  serve->add_option("--port", port);
  serve->add_option("--seed", seed);
  serve->add_option("--host", host);
  serve->add_option("--ui-dir", ui_dir, "Static UI bundle served at /");
  serve->add_option("--per-annotator", per_annotator, "Files assigned to each annotator");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*attack) {
      if (!attack_offsets.empty()) {
        std::vector<std::string> warnings;
        const auto corpus = scan_corpus(attack_in, &warnings);
        for (const auto& item : corpus) {
          const auto x = read_wav(item.wav);
          for (const auto& text : split_list(attack_offsets)) {
            const double p = std::stod(text);
            const auto label = condition_label(ConditionKind::ReverseOverlay, p);
            fs::create_directories(fs::path(attack_out) / label);
            write_wav(generate_attack(x, AttackSpec::reverse_overlay(p)), fs::path(attack_out) / label / (item.stem + ".wav"));
          }
        }
      } else {
        const auto x = read_wav(attack_in);
        write_wav(generate_attack(x, make_spec(attack_kind, attack_gain, attack_overlay)), attack_out);
      }
      return 0;
    }

    if (*analyze) {
      if (!want_fft && !want_mel && !want_mfcc) want_fft = want_mel = want_mfcc = true;
      const auto x = read_wav(analyze_in);
      const fs::path dir(analyze_out);
      fs::create_directories(dir);
      const auto stem = x.source_id();
      if (want_fft) {
        std::vector<double> padded(x.samples().begin(), x.samples().end());
        padded.resize(dsp::next_power_of_two(padded.size()), 0.0);
        const auto spec = dsp::fft(std::span<const double>(padded), x.sample_rate_hz());
        std::ofstream out(dir / (stem + "_fft.csv"));
        out << "hz,magnitude\n";
        for (std::size_t k = 0; k <= spec.bins.size() / 2; ++k) {
          out << fmt::format("{:.6f},{:.9g}\n", k * spec.bin_hz, std::abs(spec.bins[k]));
        }
        // per-frame power spectrogram for the image overlay
        const auto cfg = dsp::FeatureConfig::for_rate(x.sample_rate_hz());
        const auto frames = dsp::stft(x, cfg.frame_len, cfg.hop);
        dsp::Matrix power(frames.size(), frames.front().bins.size() / 2 + 1);
        for (std::size_t f = 0; f < frames.size(); ++f) {
          for (std::size_t k = 0; k < power.cols(); ++k) power(f, k) = std::log10(std::norm(frames[f].bins[k]) + 1e-10);
        }
        dsp::export_matrix(power, dir / (stem + "_stft"));
      }
      if (want_mel) {
        auto mel = dsp::mel_spectrogram(x);
        dsp::Matrix log_mel(mel.frames.rows(), mel.frames.cols());
        for (std::size_t r = 0; r < log_mel.rows(); ++r) {
          for (std::size_t c = 0; c < log_mel.cols(); ++c) log_mel(r, c) = 10.0 * std::log10(mel.frames(r, c) + 1e-10);
        }
        dsp::export_matrix(mel.frames, dir / (stem + "_melspec"));
        dsp::export_matrix(log_mel, dir / (stem + "_melspec_db"));
      }
      if (want_mfcc) dsp::export_matrix(dsp::to_matrix(dsp::mfcc(x)), dir / (stem + "_mfcc"));
      return 0;
    }

    if (*wer_cmd) {
      const auto ref = load_reference(ref_path);
      const auto hyp = normalize_text(slurp(hyp_path));
      const auto b = wer(ref, hyp);
      std::cout << fmt::format("{}\t{}\t{}\t{}\t{:.6f}\n", b.substitutions, b.deletions, b.insertions, b.ref_len, b.wer);
      return 0;
    }

    if (*simil) {
      const auto a = read_wav(simil_a);
      const auto b = read_wav(simil_b);
      std::cout << fmt::format("{:.6f}\t{:.6f}\n", cosine_similarity(a, b), db_relative(b, a));
      return 0;
    }

    if (*run) {
      auto cfg = ExperimentConfig::load(config_path);
      if (!run_out.empty()) cfg.output_dir = run_out;
      const auto report = run_experiment(cfg);
      emit_report(report, cfg.output_dir);
      std::cout << fmt::format("{} records, {} failures, {} generated files -> {}\n", report.records.size(),
                               report.failures.size(), report.generated_files, cfg.output_dir.string());
      return 0;
    }

    if (*serve) {
      annotation::AnnotationStore store(annotation::ConditionCatalog::scan(cond_dir), records_path, seed, per_annotator);
      std::optional<fs::path> ui;
      if (!ui_dir.empty()) ui = ui_dir;
      annotation::AnnotationServer server(store, ui);
      g_server = &server;
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      std::cerr << fmt::format("serving {} conditions on {}:{}\n", store.catalog().conditions().size(), host, port);
      const bool ok = server.listen(host, port);
      g_server = nullptr;
      return ok ? 0 : 1;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    switch (e.kind()) {
      case ErrorKind::EmptyCorpus: return 2;
      case ErrorKind::ConfigInvalid: return 3;
      default: return 1;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
