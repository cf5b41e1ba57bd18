from .dimension import MistakeTree, ldim, ldim_bruteforce, ldim_by_search, shattered_tree
from .game import ConstantLearner, OnlineLearner, SoaOnlineLearner, worst_case_mistakes
from .soa import SoaLearner, SoaResult, SoaState, soa_predict, soa_run
