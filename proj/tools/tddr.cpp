#include <CLI11.hpp>

#include "tddr/tddr.hpp"

int main(int argc, char** argv) {
    CLI::App app{"tddr: dynamic radial MRI reconstruction toolkit"};
    app.require_subcommand(1);
    CLI11_PARSE(app, argc, argv);
    return 0;
}
