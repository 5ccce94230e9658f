#include <string>
#include <vector>

#include "storm_audit/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return storm_audit::cli::run(args, storm_audit::cli::Environment::process());
}
