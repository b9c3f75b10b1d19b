#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "soficlen/job.hpp"

namespace {

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"soficlen: sofic mean length and rank estimates"};
  app.require_subcommand(1);

  std::string spec_path;
  std::string out_dir = ".";
  std::size_t jobs = 1;
  bool verbose = false;

  auto* run = app.add_subcommand("run", "Run a job file and write JSON and CSV reports");
  run->add_option("spec", spec_path, "Job file")->required();
  run->add_option("--out", out_dir, "Output directory");
  run->add_option("--jobs", jobs, "Worker threads")->check(CLI::Range(1, 256));
  run->add_flag("-v,--verbose", verbose, "Progress on stderr");

  auto* validate = app.add_subcommand("validate", "Parse and check a job file without running it");
  validate->add_option("spec", spec_path, "Job file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    const auto job = soficlen::load_job(spec_path);
    if (validate->parsed()) {
      std::cout << spec_path << ": ok (" << soficlen::quantity_name(job.quantity) << " on " << job.group->name()
                << ")\n";
      return 0;
    }
    soficlen::RunOptions options;
    options.jobs = jobs;
    if (verbose) options.log = &std::cerr;
    const auto outcome = soficlen::run_job(job, options);
    std::filesystem::create_directories(out_dir);
    const std::filesystem::path dir(out_dir);
    write_file(dir / job.json_name, outcome.json);
    write_file(dir / job.csv_name, outcome.csv);
    for (const auto& w : outcome.warnings) std::cerr << "warning: " << w << '\n';
    if (verbose) std::cerr << "wrote " << (dir / job.json_name).string() << " and " << (dir / job.csv_name).string() << '\n';
    return outcome.exit_code;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
