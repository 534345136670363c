#include "sgcdg/driver.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>

namespace
{
// config file resolution: explicit positional argument wins, then the
// SGCDG_CONFIG environment variable; with neither, defaults only
sgcdg::config gather(std::string const &path)
{
  if (!path.empty())
    return sgcdg::load_config(path);
  if (char const *env = std::getenv("SGCDG_CONFIG"))
    return sgcdg::load_config(env);
  return {};
}

int emit(std::string const &csv, sgcdg::config const &cfg)
{
  std::string const path = sgcdg::detail::get(cfg, "output", "");
  if (path.empty())
  {
    std::cout << csv;
    return 0;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out)
  {
    std::cerr << "error: cannot write output file '" << path << "'\n";
    return 2;
  }
  out << csv;
  return 0;
}
} // namespace

int main(int argc, char **argv)
{
  CLI::App app{"sparse grid central DG driver: convergence, projection, CFL "
               "and energy studies with CSV output"};
  app.require_subcommand(1);

  std::string config_path;
  int threads = 1;
  std::string subname;
  for (auto const name :
       {"convergence", "projection", "cfl", "energy", "slice"})
  {
    CLI::App *sub = app.add_subcommand(name);
    sub->add_option("config", config_path,
                    "key=value config file (default: $SGCDG_CONFIG)");
    sub->add_option("--threads", threads, "cap on worker threads");
    sub->callback([&subname, name] { subname = name; });
  }

  CLI11_PARSE(app, argc, argv);

  try
  {
    Eigen::setNbThreads(threads);
    sgcdg::config cfg = gather(config_path);
    if (threads != 1)
      cfg["threads"] = std::to_string(threads);
    std::string csv;
    if (subname == "convergence")
      csv = sgcdg::run_convergence(cfg);
    else if (subname == "projection")
      csv = sgcdg::run_projection(cfg);
    else if (subname == "cfl")
      csv = sgcdg::run_cfl(cfg);
    else if (subname == "energy")
      csv = sgcdg::run_energy(cfg);
    else
      csv = sgcdg::run_slice(cfg);
    return emit(csv, cfg);
  }
  catch (sgcdg::config_error const &e)
  {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  }
  catch (std::exception const &e)
  {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  }
}
