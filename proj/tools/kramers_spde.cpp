#include "kramers_spde/cli.hpp"

int main(int argc, char** argv) { return kspde::cli::run(argc, argv); }
