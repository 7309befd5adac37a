#include <CLI11.hpp>
#include <iostream>

#include "homog/cli.hpp"
#include "homog/parallel.hpp"
#include "homog/simd.hpp"

int main(int argc, char** argv) {
  CLI::App app{"homog: periodic homogenization laboratory"};
  app.require_subcommand(1);
  int threads = 0;
  std::string simd;
  app.add_option("--threads", threads, "worker threads (default: HOMOG_THREADS or all cores)");
  app.add_option("--simd", simd, "kernel set: scalar, avx2 or auto (default: HOMOG_SIMD or auto)");

  homog::RunOptions opts;
  std::string out_dir;
  for (const auto& name : homog::command_names()) {
    CLI::App* sub = app.add_subcommand(name, "run the " + name + " experiment");
    sub->add_option("config", opts.config, "INI config file")->required()->check(CLI::ExistingFile);
    sub->add_flag("--strict", opts.strict, "exit with 4 when a statistical check fails");
    sub->add_flag("--force", opts.force, "write into the output directory itself instead of a timestamped one");
    sub->add_option("-o,--output", out_dir, "output directory (overrides output.directory)");
    sub->callback([&opts, name] { opts.command = name; });
  }
  std::filesystem::path validate_file;
  CLI::App* val = app.add_subcommand("validate", "list config problems without running anything");
  val->add_option("config", validate_file, "INI config file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : homog::kExitConfig;
  }
  if (threads > 0) homog::set_thread_count(threads);
  if (!simd.empty() && simd != "auto") {
    try {
      homog::simd::set_active_isa(homog::simd::parse_isa(simd));
    } catch (const std::exception& e) {
      std::cerr << "config error: --simd: " << e.what() << '\n';
      return homog::kExitConfig;
    }
  }
  if (val->parsed()) return homog::validate(validate_file, std::cout);
  if (!out_dir.empty()) opts.output = out_dir;
  return homog::run(opts, std::cout, std::cerr);
}
