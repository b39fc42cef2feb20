#include "claimcheck/descriptors.hpp"
#include "claimcheck/errors.hpp"
#include "claimcheck/pipeline.hpp"

#include "CLI11.hpp"

#include <ostream>

namespace claimcheck {

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Checks body-double identity claims with face descriptors and image quality metrics", "claimcheck"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> descriptors;
  std::string output_dir;
  bool assume_aligned = false;
  int workers = 0;

  auto* analyze = app.add_subcommand("analyze", "Run the full verification pipeline from a run config");
  analyze->add_option("--config", config_path, "Run configuration (JSON)")->required();
  analyze->add_option("--descriptor", descriptors, "Descriptor preset name or file; replaces the config's list");
  analyze->add_option("--out", output_dir, "Output directory; replaces the config's output_dir");
  analyze->add_flag("--assume-aligned", assume_aligned, "Treat images without landmarks as tight face crops");
  analyze->add_option("--workers", workers, "Worker threads")->check(CLI::PositiveNumber);

  QualityOptions quality;
  auto* quality_cmd = app.add_subcommand("quality", "Score every manifest image on the eight quality metrics");
  quality_cmd->add_option("--manifest", quality.manifest, "Image manifest (JSON)")->required();
  quality_cmd->add_option("--out", quality.out, "Output CSV")->required();
  quality_cmd->add_flag("--assume-aligned", quality.assume_aligned, "Treat images without landmarks as tight face crops");
  quality_cmd->add_option("--workers", quality.workers, "Worker threads")->check(CLI::PositiveNumber);
  std::string sunglasses, gender;
  quality_cmd->add_option("--sunglasses-classifier", sunglasses, "Sunglasses classifier config");
  quality_cmd->add_option("--gender-classifier", gender, "Gender classifier config");

  CalibrateOptions calibrate;
  auto* calibrate_cmd = app.add_subcommand("calibrate", "Cache genuine/impostor scores of a reference population");
  calibrate_cmd->add_option("--manifest", calibrate.manifest, "Reference manifest (JSON)")->required();
  calibrate_cmd->add_option("--out", calibrate.out, "Output JSON cache")->required();
  calibrate_cmd->add_option("--descriptor", calibrate.descriptor, "Descriptor preset name or file");
  calibrate_cmd->add_flag("--assume-aligned", calibrate.assume_aligned, "Treat images without landmarks as tight face crops");
  calibrate_cmd->add_option("--workers", calibrate.workers, "Worker threads")->check(CLI::PositiveNumber);

  std::string statistics, render_out;
  auto* render_cmd = app.add_subcommand("render", "Re-render figures and report from a statistics file");
  render_cmd->add_option("--statistics", statistics, "statistics.json written by analyze")->required();
  render_cmd->add_option("--out", render_out, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << app.help();
    return exit_code(ErrorClass::config);
  }

  if (analyze->parsed()) {
    RunConfig cfg;
    try {
      cfg = load_run_config(config_path);
    } catch (const Error& e) {
      err << "error: " << e.what() << "\n";
      return exit_code(e.error_class());
    }
    if (!descriptors.empty()) cfg.descriptors = descriptors;
    if (!output_dir.empty()) cfg.output_dir = output_dir;
    if (assume_aligned) cfg.assume_aligned = true;
    if (workers > 0) cfg.workers = workers;
    return cmd_analyze(cfg, err);
  }
  if (quality_cmd->parsed()) {
    if (!sunglasses.empty()) quality.sunglasses_classifier = sunglasses;
    if (!gender.empty()) quality.gender_classifier = gender;
    return cmd_quality(quality, err);
  }
  if (calibrate_cmd->parsed()) return cmd_calibrate(calibrate, err);
  return cmd_render(statistics, render_out, err);
}

}  // namespace claimcheck
