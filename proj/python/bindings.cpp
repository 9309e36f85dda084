#include <pybind11/pybind11.h>

PYBIND11_MODULE(_cmrp, m) { m.doc() = "cmrp placeholder"; }
