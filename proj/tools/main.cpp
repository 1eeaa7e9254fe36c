#include "cli_app.hpp"

int main(int argc, char** argv) { return cavcool::cli::run(argc, argv); }
