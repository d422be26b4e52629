#include "nhrmt/pipeline.hpp"

#include <exception>
#include <iostream>
#include <string>
#include <vector>

// Exit codes: 0 success, 2 configuration error, 3 numeric/runtime failure.
int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);

    nhrmt::RunConfig cfg;
    try {
        cfg = nhrmt::parse_config(args);
    } catch (const nhrmt::HelpRequested& help) {
        std::cout << help.what();
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "nhrmt: config error: " << e.what() << '\n';
        return 2;
    }

    try {
        nhrmt::run(cfg);
    } catch (const std::exception& e) {
        std::cerr << "nhrmt: " << e.what() << '\n';
        return 3;
    }
    return 0;
}
