#include "pdae/cli.hpp"

int main(int argc, char** argv) { return pdae::cli::dispatch(argc, argv); }
