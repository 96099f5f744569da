from typing import List, Optional

from pydantic import BaseModel, ConfigDict

from src.modals.svm_data import BinarySvmModel


class TreeNode(BaseModel):
    '''
    One node of the class tree. Internal nodes route with `classifier`:
    decision >= 0 goes to `left` (the group holding the smallest class).
    '''
    model_config = ConfigDict(arbitrary_types_allowed=True)

    classes: List[int]
    left: Optional[int] = None
    right: Optional[int] = None
    classifier: Optional[BinarySvmModel] = None
    path: str = ''  # 'L'/'R' steps from the root
    split_converged: bool = True

    @property
    def is_leaf(self) -> bool:
        return self.left is None and self.right is None


class ClassTree(BaseModel):
    nodes: List[TreeNode] = []
    root: int = 0
    class_count: int
    splitter: str = ''

    def node(self, ref: int) -> TreeNode:
        return self.nodes[ref]

    def leaves(self) -> List[TreeNode]:
        return [node for node in self.nodes if node.is_leaf]

    def internal_nodes(self) -> List[TreeNode]:
        return [node for node in self.nodes if not node.is_leaf]

    @property
    def depth(self) -> int:
        '''Edges on the longest root-to-leaf path.'''
        deepest = 0
        stack = [(self.root, 0)]
        while stack:
            ref, level = stack.pop()
            node = self.nodes[ref]
            deepest = max(deepest, level)
            for child in (node.left, node.right):
                if child is not None:
                    stack.append((child, level + 1))
        return deepest

    def non_converged(self) -> int:
        '''Internal nodes whose routing classifier or split search hit an iteration cap.'''
        return sum(
            1 for node in self.internal_nodes()
            if not node.split_converged or (node.classifier is not None and not node.classifier.converged)
        )
