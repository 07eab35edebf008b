#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "capax/synth/trainer.hpp"

int main(int argc, char** argv) {
  CLI::App app{"synthetic trainer speaking the capax line protocol on stdin/stdout"};
  double sigma = capax::synth::ResponseSurface::reference().sigma;
  std::string mode = "raw";
  app.add_option("--sigma", sigma, "residual sd of test DICE")->check(CLI::NonNegativeNumber);
  app.add_option("--mode", mode, "raw or clamped test DICE")->check(CLI::IsMember({"raw", "clamped"}));
  CLI11_PARSE(app, argc, argv);

  capax::synth::TrainerSession session(capax::synth::ResponseSurface::reference(
      sigma, mode == "clamped" ? capax::synth::ClampMode::clamped : capax::synth::ClampMode::raw));

  std::string line;
  while (!session.finished() && std::getline(std::cin, line)) {
    for (const auto& reply : session.handle(line)) std::cout << reply << '\n';
    std::cout.flush();
  }
  if (!session.finished()) return 3;
  return session.failed() ? 2 : 0;
}
