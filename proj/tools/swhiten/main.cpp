#include <iostream>

#include <CLI11.hpp>

#include "commands.hpp"
#include "sw/errors.hpp"

namespace {

const char* error_kind(const sw::Error& e) {
  if (dynamic_cast<const sw::FormatError*>(&e)) return "FormatError";
  if (dynamic_cast<const sw::FileError*>(&e)) return "FileError";
  if (dynamic_cast<const sw::ConfigError*>(&e)) return "ConfigError";
  if (dynamic_cast<const sw::ShapeError*>(&e)) return "ShapeError";
  if (dynamic_cast<const sw::InvalidInput*>(&e)) return "InvalidInput";
  if (dynamic_cast<const sw::DegenerateSpectrum*>(&e)) return "DegenerateSpectrum";
  if (dynamic_cast<const sw::NumericalFailure*>(&e)) return "NumericalFailure";
  if (dynamic_cast<const sw::StateError*>(&e)) return "StateError";
  if (dynamic_cast<const sw::OracleFailure*>(&e)) return "OracleFailure";
  if (dynamic_cast<const sw::TrainingDiverged*>(&e)) return "TrainingDiverged";
  return "Error";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Switchable whitening toolkit"};
  app.require_subcommand(1);
  int status = 0;
  swhiten::register_gradcheck(app, status);
  swhiten::register_whiten(app, status);
  swhiten::register_bench(app, status);
  swhiten::register_train_demo(app, status);
  swhiten::register_inspect(app, status);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const sw::Error& e) {
    std::cerr << "error: " << error_kind(e) << ": " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return status;
}
