#include "nodal_lab/experiment.hpp"

int main(int argc, char** argv) { return nodal_lab::run_cli(argc, argv); }
