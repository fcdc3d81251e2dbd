#pragma once

#include "hopsweep/dmrg.hpp"
#include "hopsweep/drive.hpp"
#include "hopsweep/io.hpp"
#include "hopsweep/lanczos.hpp"
#include "hopsweep/maxcut.hpp"
#include "hopsweep/mpo.hpp"
#include "hopsweep/mps.hpp"
#include "hopsweep/oracle.hpp"
#include "hopsweep/qubo.hpp"
#include "hopsweep/rng.hpp"
#include "hopsweep/sudoku.hpp"
#include "hopsweep/tensor.hpp"
