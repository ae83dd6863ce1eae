#include <string>
#include <vector>

#include "cslab/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return cslab::run_cli(args);
}
