#include <vector>

#include "airkit/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return airkit::run_cli(args);
}
