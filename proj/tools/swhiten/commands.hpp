#pragma once

#include <CLI11.hpp>

namespace swhiten {

// Each registers a subcommand whose callback stores its exit status.
void register_gradcheck(CLI::App& root, int& status);
void register_whiten(CLI::App& root, int& status);
void register_bench(CLI::App& root, int& status);
void register_train_demo(CLI::App& root, int& status);
void register_inspect(CLI::App& root, int& status);

}  // namespace swhiten
