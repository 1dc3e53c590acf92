#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "csaddle/imf.hpp"

namespace csaddle::harness {

/// All validation problems of a config, reported at once.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(std::vector<std::string> problems);
  const std::vector<std::string>& problems() const { return problems_; }

 private:
  static std::string join(const std::vector<std::string>& problems);
  std::vector<std::string> problems_;
};

struct InitialCondition {
  enum class Kind {
    CosPiX,
    Cos2PiX,
    Sin2PiX,
    Constant,
    TanhLayer,
    Lamellar,
    CylinderSeed,
    Nucleus,
    File
  };
  Kind kind = Kind::CosPiX;
  double m = 0.6;       // mass of constant / tanh_layer profiles
  double width = 0.05;  // tanh interface width
  double radius = 0.0;  // droplet / nucleus radius (0: derived from m)
  double amp = 1.0;     // amplitude scale
  int k = 4;            // lamellar mode count along y
  std::string file;
  double perturb_amp = 0.0;
  std::uint64_t seed = 0;
  bool seed_given = false;
};

struct ExperimentSpec {
  std::string name = "experiment";
  EnergyModel model = GinzburgLandau1D{};
  MetricKind metric = MetricKind::L2;
  Bc bc = Bc::Neumann;
  int n = 200;
  int ny = 100;
  double extent = 1.0;
  double extent_y = 0.0;
  InitialCondition init;

  enum class Mode { Imf, Relax } mode = Mode::Imf;
  SchemeKind scheme = SchemeKind::CS;
  double dt = 0.1;
  InnerStop inner;
  double outer_tol = 1e-8;
  int max_cycles = 500;
  long relax_max_steps = 2000000;
  double eig_tol = 1e-9;
  int eig_max_iter = 2000;
  bool deflate = true;
  double deflate_angle_deg = 10.0;
  int guard_cap = 100;
  int spectrum_k = 3;
  std::string out_dir = ".";

  GridPtr make_grid() const;
  ProblemKind problem() const;
  StepperConfig stepper_config() const;
};

/// Flat `key = value` file, '#' comments, unknown keys fatal. Errors carry
/// line numbers and are reported all at once.
ExperimentSpec load_config(const std::string& path);
ExperimentSpec parse_config(const std::string& text, const std::string& origin);

}  // namespace csaddle::harness
