#include <cstdio>
#include <exception>
#include <string>

#include "CLI11.hpp"

#include "pnlab/experiment.hpp"
#include "pnlab/io.hpp"

namespace {

int cmd_run(const std::string& config_path) {
  pnlab::ExperimentConfig cfg = pnlab::ExperimentConfig::from_file(config_path);
  pnlab::ExperimentReport rep = pnlab::run_experiment(cfg);
  std::string dir = pnlab::resolve_output_dir(cfg.output_dir);
  for (const std::string& path : pnlab::write_report(rep, dir))
    std::printf("wrote %s\n", path.c_str());
  int passed = 0;
  for (const auto& a : rep.assertions) {
    std::printf("%s  %-24s measured=%s bound=%s\n", a.pass ? "PASS" : "FAIL", a.name.c_str(),
                pnlab::fmt_g12(a.measured).c_str(), pnlab::fmt_g12(a.bound).c_str());
    passed += a.pass ? 1 : 0;
  }
  std::printf("%s: %d/%zu assertions passed\n", rep.experiment.c_str(), passed,
              rep.assertions.size());
  return rep.pass() ? 0 : 1;
}

int cmd_render(const std::string& csv_path, const std::string& svg_path) {
  pnlab::RawField field = pnlab::read_field_csv(csv_path);
  pnlab::HeatmapOptions opts;
  opts.title = csv_path;
  pnlab::write_text_file(svg_path, pnlab::heatmap_svg(field, opts));
  std::printf("wrote %s\n", svg_path.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"half-space heat flow with an oscillatory flux face: experiment runner"};
  app.require_subcommand(1);

  std::string config_path, csv_path, svg_path;
  CLI::App* run = app.add_subcommand("run", "run an experiment config and write its report");
  run->add_option("config", config_path, "experiment config file")->required();
  CLI::App* render = app.add_subcommand("render", "render a field CSV to an SVG heatmap");
  render->add_option("field", csv_path, "field CSV (x1,x2,value)")->required();
  render->add_option("out", svg_path, "output SVG path")->required();
  CLI::App* list = app.add_subcommand("list-experiments", "print the known experiment names");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (run->parsed()) return cmd_run(config_path);
    if (render->parsed()) return cmd_render(csv_path, svg_path);
    if (list->parsed()) {
      for (const auto& name : pnlab::experiment_names()) std::printf("%s\n", name.c_str());
      return 0;
    }
  } catch (const pnlab::Error& e) {
    std::fprintf(stderr, "error [%s]: %s\n", pnlab::error_code_name(e.code()), e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 2;
}
