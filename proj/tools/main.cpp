#include "echosim/cli.hpp"

int main(int argc, char** argv) {
    return echosim::cli_dispatch(std::vector<std::string>(argv + 1, argv + argc));
}
