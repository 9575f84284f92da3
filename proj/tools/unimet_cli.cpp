#include "cli_app.hpp"

int main(int argc, char** argv) { return unimet::cli::run(argc, argv); }
