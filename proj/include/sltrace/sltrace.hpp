#pragma once

#include "sltrace/errors.hpp"
#include "sltrace/polynomial.hpp"
#include "sltrace/problem.hpp"
#include "sltrace/shooting.hpp"
#include "sltrace/asymptotics.hpp"
#include "sltrace/spectrum.hpp"
#include "sltrace/trace.hpp"
#include "sltrace/reference.hpp"
