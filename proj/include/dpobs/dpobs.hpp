#pragma once

#include "dpobs/assembly.hpp"
#include "dpobs/catalog.hpp"
#include "dpobs/cli.hpp"
#include "dpobs/config.hpp"
#include "dpobs/convergence_lab.hpp"
#include "dpobs/errors.hpp"
#include "dpobs/expression.hpp"
#include "dpobs/hypotheses.hpp"
#include "dpobs/mesh.hpp"
#include "dpobs/musielak_orlicz.hpp"
#include "dpobs/nonsmooth.hpp"
#include "dpobs/qp_oracle.hpp"
#include "dpobs/report_io.hpp"
#include "dpobs/solver.hpp"
