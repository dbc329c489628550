#include "shp/cli.hpp"

int main(int argc, char** argv) { return shp::cli::run(argc, argv); }
