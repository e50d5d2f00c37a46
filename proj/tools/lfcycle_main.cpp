#include "lfcycle/cli.hpp"

int main(int argc, char** argv) {
    return lfcycle::run_cli(std::vector<std::string>(argv + 1, argv + argc));
}
