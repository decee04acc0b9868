#include "evosa/cli.hpp"

auto main(int argc, char** argv) -> int
{
    return evosa::cli::Run(argc, argv);
}
